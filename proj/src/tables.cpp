#include "hybridpop/tables.hpp"

#include <cmath>

namespace hybridpop
{

RateTables::RateTables(const ModelParams& params, const Discretization& grid)
    : params_(params)
    , grid_(grid)
    , space_weights_(grid.space_weights())
    , age_weights_(grid.age_weights())
{
    const std::size_t n = grid.n_ages();
    ages_.resize(n);
    beta_age_.resize(n);
    beta_age_weights_.resize(n);
    mu_age_steps_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        ages_[j]             = grid.age(j);
        beta_age_[j]         = params.beta.age_factor(ages_[j]);
        beta_age_weights_[j] = age_weights_[j] * beta_age_[j];
        mu_age_steps_[j]     = grid.dt * params.mu.age_factor(ages_[j] + 0.5 * grid.dt);
    }
}

std::vector<double> RateTables::mu_row_rates(double P) const
{
    std::vector<double> rates(grid_.n_x);
    for (std::size_t i = 0; i < rates.size(); ++i) {
        rates[i] = mu_at(i, P);
    }
    return rates;
}

std::vector<double> RateTables::cumulative_survival(std::size_t i, double P) const
{
    std::vector<double> s(grid_.n_ages());
    const double rate = mu_at(i, P);
    s[0]              = 1.0;
    for (std::size_t j = 1; j < s.size(); ++j) {
        s[j] = s[j - 1] * std::exp(-rate * mu_age_steps_[j - 1]);
    }
    return s;
}

SpatialField RateTables::discounted_recruitment(double P, double k, kernels::Policy policy) const
{
    std::vector<double> coeffs(grid_.n_ages());
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        coeffs[j] = beta_age_weights_[j] * std::exp(-k * ages_[j]);
    }
    SpatialField out(grid_.n_x);
    auto rates = mu_row_rates(P);
    kernels::survival_weighted_sums(policy, rates, mu_age_steps_, coeffs, out.span());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= chi_at(i, P) * params_.e[i] * beta_at(i, P);
    }
    return out;
}

SpatialField RateTables::settled_lifetime(double P, kernels::Policy policy) const
{
    SpatialField out(grid_.n_x);
    auto rates = mu_row_rates(P);
    kernels::survival_weighted_sums(policy, rates, mu_age_steps_, age_weights_, out.span());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= chi_at(i, P) * params_.e[i];
    }
    return out;
}

} // namespace hybridpop
