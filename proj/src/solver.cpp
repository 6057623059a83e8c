#include "hybridpop/solver.hpp"
#include "hybridpop/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybridpop
{
namespace
{

void check_shapes(const Discretization& grid, const SpatialField& u, const AgeField& w)
{
    if (u.size() != grid.n_x) {
        throw std::invalid_argument("u has " + std::to_string(u.size()) + " nodes, grid has " +
                                    std::to_string(grid.n_x));
    }
    if (w.n_x() != grid.n_x || w.n_ages() != grid.n_ages()) {
        throw std::invalid_argument("w shape does not match the grid");
    }
}

void fill_caches(const RateTables& tables, PopulationState& state, kernels::Policy policy)
{
    const auto& grid = tables.grid();
    state.settled    = SpatialField(grid.n_x);
    kernels::weighted_age_sums(policy, state.w, tables.age_weights(), state.settled.span());
    state.P = integrate_space(grid, state.settled.span());

    state.B = SpatialField(grid.n_x);
    kernels::weighted_age_sums(policy, state.w, tables.beta_age_weights(), state.B.span());
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        state.B[i] *= tables.beta_at(i, state.P);
    }
    state.P_peak = std::max(state.P_peak, state.P);
}

double lerp_series(const std::vector<double>& series, double dt, double t)
{
    const double pos = t / dt;
    auto n           = static_cast<std::size_t>(std::floor(pos));
    if (n + 1 >= series.size()) {
        return series.back();
    }
    const double f = pos - static_cast<double>(n);
    return (1.0 - f) * series[n] + f * series[n + 1];
}

double lerp_field(const std::vector<SpatialField>& history, std::size_t i, double dt, double t)
{
    const double pos = t / dt;
    auto n           = static_cast<std::size_t>(std::floor(pos));
    if (n + 1 >= history.size()) {
        return history.back()[i];
    }
    const double f = pos - static_cast<double>(n);
    return (1.0 - f) * history[n][i] + f * history[n + 1][i];
}

double lerp_age(const Discretization& grid, std::span<const double> row, double a)
{
    const double pos = a / grid.dt;
    auto j           = static_cast<std::size_t>(std::floor(pos));
    if (j >= grid.n_a) {
        return j == grid.n_a ? row[grid.n_a] : 0.0;
    }
    const double f = pos - static_cast<double>(j);
    return (1.0 - f) * row[j] + f * row[j + 1];
}

} // namespace

PopulationState make_state(const ModelParams& params, const Discretization& grid, SpatialField u, AgeField w, double t)
{
    check_shapes(grid, u, w);
    for (double v : u) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("initial u contains nonfinite values");
        }
    }
    for (double v : w.flat()) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("initial w contains nonfinite values");
        }
    }
    PopulationState s;
    s.t = t;
    s.u = std::move(u);
    s.w = std::move(w);
    RateTables tables(params, grid);
    fill_caches(tables, s, kernels::Policy::serial);
    return s;
}

PopulationState zero_state(const ModelParams& params, const Discretization& grid)
{
    return make_state(params, grid, SpatialField(grid.n_x), AgeField(grid.n_x, grid.n_ages()));
}

double total_population(const Discretization& grid, const PopulationState& state)
{
    check_shapes(grid, state.u, state.w);
    const auto weights = grid.age_weights();
    SpatialField settled(grid.n_x);
    kernels::serial::weighted_age_sums(state.w, weights, settled.span());
    return integrate_space(grid, settled.span());
}

SpatialField recruitment_field(const ModelParams& params, const Discretization& grid, const PopulationState& state)
{
    check_shapes(grid, state.u, state.w);
    RateTables tables(params, grid);
    SpatialField B(grid.n_x);
    kernels::serial::weighted_age_sums(state.w, tables.beta_age_weights(), B.span());
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        B[i] *= tables.beta_at(i, state.P);
    }
    return B;
}

Stepper::Stepper(const ModelParams& params, const Discretization& grid, StepperOptions options)
    : tables_(params, grid)
    , options_(options)
    , diffusion_(neumann_laplacian(grid, -grid.dt * params.diffusion))
    , system_(diffusion_)
    , factors_(grid.n_x, grid.n_ages())
    , rhs_(grid.n_x)
    , renewal_(grid.n_x)
    , exiting_(grid.n_x)
    , scratch_(grid.n_x)
{
}

void Stepper::ensure_factors(double P)
{
    if (factors_ready_ && (tables_.params().mu.density_independent() || P == factors_P_)) {
        return;
    }
    const auto rates = tables_.mu_row_rates(P);
    kernels::survival_factors(options_.policy, rates, tables_.mu_age_steps(), factors_);
    factors_ready_ = true;
    factors_P_     = P;
}

void Stepper::refresh(PopulationState& state) const
{
    fill_caches(tables_, state, options_.policy);
}

void Stepper::advance(PopulationState& state)
{
    const auto& grid   = tables_.grid();
    const auto& params = tables_.params();
    const double dt    = grid.dt;
    const std::size_t n = grid.n_x;
    check_shapes(grid, state.u, state.w);

    // dispersers: implicit diffusion and loss, explicit recruitment
    for (std::size_t i = 0; i < n; ++i) {
        system_.diag[i] = diffusion_.diag[i] + 1.0 + dt * (params.m[i] + params.e[i] + params.c[i] * state.u[i]);
        rhs_[i]         = state.u[i] + dt * state.B[i];
    }
    system_.solve(rhs_, state.u.span());

    for (std::size_t i = 0; i < n; ++i) {
        double& v = state.u[i];
        if (!std::isfinite(v) || v > options_.blowup_threshold) {
            std::ostringstream msg;
            msg << "blow-up at t = " << state.t + dt << ", node " << i << ": u = " << v;
            throw NumericalError(msg.str());
        }
        if (v < 0.0) {
            if (v < -options_.negativity_tol) {
                std::ostringstream msg;
                msg << "negative density at t = " << state.t + dt << ", node " << i << ": u = " << v;
                throw NumericalError(msg.str());
            }
            v = 0.0;
            ++state.clamped;
        }
    }

    // sedentary: shift along characteristics, renew at age zero with the lagged P
    ensure_factors(state.P);
    for (std::size_t i = 0; i < n; ++i) {
        renewal_[i] = tables_.chi_at(i, state.P) * params.e[i] * state.u[i];
    }
    kernels::advance_ages(options_.policy, state.w, factors_, renewal_, exiting_);

    if (!grid.finite_horizon) {
        const double discarded = integrate_space(grid, exiting_) * dt;
        const double scale     = std::max(state.P_peak, state.P);
        if (discarded > grid.tail_tol * scale) {
            std::ostringstream msg;
            msg << "age truncation discarded " << discarded << " at t = " << state.t + dt
                << ", above tail_tol times the population scale " << scale;
            throw NumericalError(msg.str());
        }
    }

    state.t += dt;
    ++state.step;
    fill_caches(tables_, state, options_.policy);
    if (!std::isfinite(state.P) || state.P > options_.blowup_threshold) {
        std::ostringstream msg;
        msg << "blow-up at t = " << state.t << ": P = " << state.P;
        throw NumericalError(msg.str());
    }
}

Stepper::Fluxes Stepper::fluxes(const PopulationState& state)
{
    const auto& grid   = tables_.grid();
    const auto& params = tables_.params();
    ensure_factors(state.P);
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        scratch_[i] = tables_.chi_at(i, state.P) * params.e[i] * state.u[i];
    }
    const double inflow = integrate_space(grid, scratch_);
    kernels::loss_sums(options_.policy, state.w, factors_, scratch_);
    return {inflow, integrate_space(grid, scratch_)};
}

PopulationState step(const ModelParams& params, const Discretization& grid, const PopulationState& state)
{
    Stepper stepper(params, grid, {kernels::Policy::serial});
    PopulationState next = state;
    stepper.advance(next);
    return next;
}

Trajectory simulate(const ModelParams& params, const Discretization& grid, const PopulationState& initial,
                    double t_end, const SimulationOptions& options)
{
    if (!(t_end > initial.t)) {
        throw std::invalid_argument("t_end must exceed the initial time");
    }
    Stepper stepper(params, grid, options.stepper);
    const double dt = grid.dt;
    const auto n_steps = static_cast<std::size_t>(std::ceil((t_end - initial.t) / dt - 1e-9));

    // output times -> step indices, nearest step, deduplicated
    std::vector<std::size_t> marks;
    if (options.output_times.empty()) {
        marks = {0, n_steps};
    }
    else {
        for (double t : options.output_times) {
            double k = std::round((t - initial.t) / dt);
            k        = std::clamp(k, 0.0, static_cast<double>(n_steps));
            marks.push_back(static_cast<std::size_t>(k));
        }
        std::sort(marks.begin(), marks.end());
        marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    }

    Trajectory traj;
    traj.dt = dt;
    const std::size_t levels = n_steps + 1;
    traj.times.reserve(levels);
    traj.P_series.reserve(levels);
    traj.max_u_series.reserve(levels);
    traj.min_u_series.reserve(levels);
    traj.max_settled_series.reserve(levels);
    traj.inflow_series.reserve(levels);
    traj.outflow_series.reserve(levels);

    PopulationState state = initial;
    stepper.refresh(state);
    std::size_t next_mark = 0;
    auto record = [&](std::size_t k) {
        traj.times.push_back(state.t);
        traj.P_series.push_back(state.P);
        traj.max_u_series.push_back(state.u.max());
        traj.min_u_series.push_back(state.u.min());
        traj.max_settled_series.push_back(state.settled.max());
        const auto f = stepper.fluxes(state);
        traj.inflow_series.push_back(f.inflow);
        traj.outflow_series.push_back(f.outflow);
        if (options.record_u_history) {
            traj.u_history.push_back(state.u);
        }
        if (next_mark < marks.size() && marks[next_mark] == k) {
            traj.snapshots.push_back(state);
            ++next_mark;
        }
        if (options.observer) {
            options.observer(state);
        }
    };

    record(0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        stepper.advance(state);
        record(k);
    }
    return traj;
}

double characteristic_oracle(const ModelParams& params, const Discretization& grid, const AgeField& w0,
                             const std::vector<SpatialField>& u_history, const std::vector<double>& P_history,
                             std::size_t x_index, double a, double t)
{
    if (x_index >= grid.n_x) {
        throw std::out_of_range("x index outside the grid");
    }
    if (a < 0.0 || a > grid.horizon * (1.0 + 1e-12) || t < 0.0) {
        throw std::invalid_argument("age or time outside the lattice");
    }
    if (w0.n_x() != grid.n_x || w0.n_ages() != grid.n_ages()) {
        throw std::invalid_argument("w0 shape does not match the grid");
    }
    if (t == 0.0) {
        return lerp_age(grid, w0.row(x_index), a);
    }
    const double dt  = grid.dt;
    const double eps = 1e-9 * dt;
    if (std::abs(a - t) <= eps) {
        throw std::invalid_argument("a = t lies on the characteristic seam");
    }
    if (P_history.empty() || static_cast<double>(P_history.size() - 1) * dt < t - eps) {
        throw std::invalid_argument("P history does not cover [0, t]");
    }

    // mortality integral along the characteristic, midpoint rule on the dt lattice
    auto decay = [&](double span) {
        const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
        const double h = span / static_cast<double>(m);
        double integral = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double s = (static_cast<double>(k) + 0.5) * h;
            const double P = lerp_series(P_history, dt, t - s);
            integral += h * params.mu(x_index, a - s, P);
        }
        return std::exp(-integral);
    };

    if (a > t) {
        return lerp_age(grid, w0.row(x_index), a - t) * decay(t);
    }
    if (u_history.empty() || static_cast<double>(u_history.size() - 1) * dt < t - eps) {
        throw std::invalid_argument("u history does not cover [0, t]");
    }
    const double birth = t - a;
    const double P_b   = lerp_series(P_history, dt, birth);
    const double u_b   = lerp_field(u_history, x_index, dt, birth);
    return params.chi(x_index, 0.0, P_b) * params.e[x_index] * u_b * decay(a);
}

double p_balance_residual(const Trajectory& traj)
{
    const auto& P = traj.P_series;
    if (P.size() < 3 || traj.inflow_series.size() != P.size() || traj.outflow_series.size() != P.size()) {
        return 0.0;
    }
    double worst = 0.0;
    for (std::size_t n = 1; n + 1 < P.size(); ++n) {
        const double dPdt = (P[n + 1] - P[n - 1]) / (traj.times[n + 1] - traj.times[n - 1]);
        worst = std::max(worst, std::abs(dPdt - (traj.inflow_series[n] - traj.outflow_series[n])));
    }
    return worst;
}

} // namespace hybridpop
