#pragma once

#include "hybridpop/fields.hpp"
#include "hybridpop/grid.hpp"
#include "hybridpop/kernels.hpp"
#include "hybridpop/rates.hpp"
#include "hybridpop/tables.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace hybridpop
{

/// Disperser field u and sedentary field w at one time level, with the nonlocal scalars cached.
struct PopulationState {
    std::size_t step = 0;
    double t         = 0.0;
    SpatialField u;
    AgeField w;            // n_x by n_ages
    double P = 0.0;        // total sedentary population
    SpatialField B;        // recruitment
    SpatialField settled;  // age integral of w per node
    double P_peak = 0.0;   // running maximum of P, reference scale for the tail-mass check
    std::size_t clamped = 0; // tiny negative values reset to zero so far
};

/// Builds a state from fields and fills the caches. Throws std::invalid_argument on shape mismatch.
PopulationState make_state(const ModelParams& params, const Discretization& grid, SpatialField u, AgeField w,
                           double t = 0.0);

PopulationState zero_state(const ModelParams& params, const Discretization& grid);

/// Trapezoid in x, trapezoid on the age nodes.
double total_population(const Discretization& grid, const PopulationState& state);

/// B(x) = sum_j alpha_j beta(x, a_j, P) w(x, a_j) at the cached P.
SpatialField recruitment_field(const ModelParams& params, const Discretization& grid, const PopulationState& state);

struct StepperOptions {
    kernels::Policy policy   = kernels::Policy::parallel;
    double blowup_threshold  = 1e12;
    double negativity_tol    = 1e-12;
};

/// Reusable time stepper; owns the sampled rate tables and scratch buffers.
///
/// One step of size dt:
///  1. u: (I + dt (m + e + c u^n) - dt d Lap) u^{n+1} = u^n + dt B^n
///  2. w: shift one age node with survival exp(-dt mu(x, a_j + dt/2, P^n)),
///     renewal w_0 = chi(x, P^n) e(x) u^{n+1}
///  3. refresh P, B.
class Stepper
{
public:
    Stepper(const ModelParams& params, const Discretization& grid, StepperOptions options = {});

    const RateTables& tables() const { return tables_; }
    const Discretization& grid() const { return tables_.grid(); }

    /// Advances in place. Throws NumericalError on blow-up, nonfinite values, negativity
    /// beyond tolerance, or (infinite horizon) a truncated tail carrying too much mass.
    void advance(PopulationState& state);

    /// Recomputes P, B and the per-node age integrals from w.
    void refresh(PopulationState& state) const;

    /// Settling flux integral of chi e u and the loss integral (deaths plus mass leaving
    /// the age lattice) at the state's own P.
    struct Fluxes {
        double inflow;
        double outflow;
    };
    Fluxes fluxes(const PopulationState& state);

private:
    void ensure_factors(double P);

    RateTables tables_;
    StepperOptions options_;
    Tridiagonal diffusion_; // -dt d Lap
    Tridiagonal system_;
    AgeField factors_;
    bool factors_ready_ = false;
    double factors_P_   = 0.0;
    std::vector<double> rhs_;
    std::vector<double> renewal_;
    std::vector<double> exiting_;
    std::vector<double> scratch_;
};

PopulationState step(const ModelParams& params, const Discretization& grid, const PopulationState& state);

struct Trajectory {
    std::vector<PopulationState> snapshots;
    std::vector<double> times;
    std::vector<double> P_series;
    std::vector<double> max_u_series;
    std::vector<double> min_u_series;
    /// max over x of the age integral of w
    std::vector<double> max_settled_series;
    std::vector<double> inflow_series;
    std::vector<double> outflow_series;
    /// u at every recorded time; filled only when requested.
    std::vector<SpatialField> u_history;
    double dt = 0.0;
};

struct SimulationOptions {
    std::vector<double> output_times;
    bool record_u_history = false;
    StepperOptions stepper;
    /// Called after every recorded time level, including the initial one.
    std::function<void(const PopulationState&)> observer;
};

/// Steps from `initial` until t_end (rounded up to a whole step), recording dense series at
/// every time level and snapshots at the steps nearest to each output time.
Trajectory simulate(const ModelParams& params, const Discretization& grid, const PopulationState& initial,
                    double t_end, const SimulationOptions& options = {});

/// Closed-form solution along characteristics with midpoint quadrature of the mortality
/// integral; histories are sampled at t_n = n dt and interpolated linearly in time.
/// Throws std::invalid_argument on the seam a == t or when histories do not cover [0, t].
double characteristic_oracle(const ModelParams& params, const Discretization& grid, const AgeField& w0,
                             const std::vector<SpatialField>& u_history, const std::vector<double>& P_history,
                             std::size_t x_index, double a, double t);

/// max over interior time levels of |dP/dt - (inflow - outflow)|, centered differences.
double p_balance_residual(const Trajectory& traj);

} // namespace hybridpop
