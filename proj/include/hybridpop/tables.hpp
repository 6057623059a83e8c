#pragma once

#include "hybridpop/grid.hpp"
#include "hybridpop/kernels.hpp"
#include "hybridpop/rates.hpp"

#include <span>
#include <vector>

namespace hybridpop
{

/// Rate laws sampled on a grid. Separability lets every age profile be tabulated once;
/// only the density factors are evaluated per call.
///
/// Survival from node j to node j+1 uses mu at the interval midpoint a_j + dt/2, so the
/// cumulative survival S_j = exp(-sum_{l<j} dt mu(a_l + dt/2)) is the midpoint rule for
/// the mortality integral.
class RateTables
{
public:
    RateTables(const ModelParams& params, const Discretization& grid);

    const ModelParams& params() const { return params_; }
    const Discretization& grid() const { return grid_; }

    std::span<const double> space_weights() const { return space_weights_; }
    std::span<const double> age_weights() const { return age_weights_; }
    std::span<const double> ages() const { return ages_; }
    /// beta age factor at each node.
    std::span<const double> beta_age() const { return beta_age_; }
    /// age weights times beta age factor.
    std::span<const double> beta_age_weights() const { return beta_age_weights_; }
    /// dt * (mu age factor at the interval midpoints).
    std::span<const double> mu_age_steps() const { return mu_age_steps_; }

    double beta_at(std::size_t i, double P) const { return params_.beta.spatial()[i] * params_.beta.density_factor(P); }
    double mu_at(std::size_t i, double P) const { return params_.mu.spatial()[i] * params_.mu.density_factor(P); }
    double chi_at(std::size_t i, double P) const { return params_.chi.spatial()[i] * params_.chi.density_factor(P); }

    /// row rates for the survival kernels: mu spatial times density factor at P.
    std::vector<double> mu_row_rates(double P) const;

    /// Cumulative survival S_j at node i and density P, j = 0..n_a.
    std::vector<double> cumulative_survival(std::size_t i, double P) const;

    /// K(x) = chi(x,P) e(x) sum_j alpha_j beta(x,a_j,P) S_j(x,P) exp(-k a_j): the discounted lifetime
    /// recruitment of one settler.
    SpatialField discounted_recruitment(double P, double k, kernels::Policy policy = kernels::Policy::parallel) const;

    /// chi(x,P) e(x) sum_j alpha_j S_j(x,P): expected settled lifetime of one disperser.
    SpatialField settled_lifetime(double P, kernels::Policy policy = kernels::Policy::parallel) const;

private:
    ModelParams params_;
    Discretization grid_;
    std::vector<double> space_weights_;
    std::vector<double> age_weights_;
    std::vector<double> ages_;
    std::vector<double> beta_age_;
    std::vector<double> beta_age_weights_;
    std::vector<double> mu_age_steps_;
};

} // namespace hybridpop
