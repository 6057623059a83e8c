#include "hybridpop/verify.hpp"
#include "hybridpop/audit.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/tables.hpp"
#include "hybridpop/text.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hybridpop
{
namespace
{

constexpr double pi = std::numbers::pi;

// Uniform double in [lo, hi) from the raw engine output, independent of the library's distributions.
class Draw
{
public:
    explicit Draw(std::uint64_t seed)
        : engine_(seed)
    {
    }

    double operator()(double lo, double hi)
    {
        const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * unit;
    }

private:
    std::mt19937_64 engine_;
};

// a0 + sum_{k=1..3} a_k cos(k pi x / L), |a_k| <= a0 / 4, so the field stays above a0 / 4.
SpatialField cosine_mixture(const Discretization& grid, Draw& draw, double scale)
{
    const double a0 = scale * draw(0.2, 1.0);
    double amp[3];
    for (double& a : amp) {
        a = draw(-0.25, 0.25) * a0;
    }
    SpatialField f(grid.n_x);
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        double v = a0;
        for (int k = 0; k < 3; ++k) {
            v += amp[k] * std::cos((k + 1) * pi * grid.x(i) / grid.length);
        }
        f[i] = v;
    }
    return f;
}

AgeField separable(const Discretization& grid, const SpatialField& f, double rate)
{
    AgeField w(grid.n_x, grid.n_ages());
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            w(i, j) = f[i] * std::exp(-rate * grid.age(j));
        }
    }
    return w;
}

double sup_diff(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s = std::max(s, std::abs(a[k] - b[k]));
    }
    return s;
}

double sup_abs(std::span<const double> a)
{
    double s = 0.0;
    for (double v : a) {
        s = std::max(s, std::abs(v));
    }
    return s;
}

double relative_gap(const PopulationState& s, const EquilibriumReport& eq)
{
    const double du = sup_diff(s.u.span(), eq.u_star.span()) / std::max(sup_abs(eq.u_star.span()), 1e-300);
    const double dw = sup_diff(s.w.flat(), eq.w_star.flat()) / std::max(sup_abs(eq.w_star.flat()), 1e-300);
    return std::max(du, dw);
}

std::size_t tail_start(const Trajectory& traj)
{
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    const double cut = t0 + 0.75 * (t1 - t0);
    std::size_t k = 0;
    while (k + 1 < traj.times.size() && traj.times[k] < cut - 1e-12 * std::max(1.0, std::abs(cut))) {
        ++k;
    }
    return k;
}

std::string r0_reason(double r0)
{
    const int s = banded_sign(r0 - 1.0);
    return s < 0 ? "R₀ < 1" : s == 0 ? "R₀ = 1" : "R₀ > 1";
}

VerdictReport skipped(std::string name, std::string reason)
{
    VerdictReport v;
    v.name        = std::move(name);
    v.skipped     = true;
    v.passed      = false;
    v.skip_reason = std::move(reason);
    return v;
}

} // namespace

SuperSubPair build_super_sub(const ModelParams& params, const Discretization& grid, const SpectralReport& report,
                             double floor)
{
    if (!report.s_L0 || !(*report.s_L0 > 0.0) || report.phi_age.n_x() != grid.n_x) {
        throw std::invalid_argument("super/sub construction needs a positive growth bound with its eigenfunction");
    }
    const auto b = bound_constants(params);
    const double ce = b.chi_sup * b.e_sup;

    SuperSubPair pair;
    double M1 = std::max({ce, b.beta_sup * ce / (b.mu_inf * b.c_inf), floor});
    double M2 = ce * M1;
    // round-off allowance: equality is admissible in both constraints
    const double slack = 1.0 + 1e-12;
    while (!(M2 * b.beta_sup / b.mu_inf <= slack * b.c_inf * M1 * M1 && ce * M1 <= slack * M2)) {
        M1 *= 2.0;
        M2 = ce * M1;
    }
    pair.M1 = M1;
    pair.M2 = M2;

    SpatialField u_up(grid.n_x, M1);
    AgeField w_up(grid.n_x, grid.n_ages());
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            w_up(i, j) = M2 * std::exp(-params.mu_lower * grid.age(j));
        }
    }
    pair.upper = make_state(params, grid, std::move(u_up), std::move(w_up));

    const RateTables tables(params, grid);
    const double lambda0 = *report.s_L0;
    pair.lambda0         = lambda0;
    const auto& phi      = report.phi;
    const auto& psi      = report.phi_age;

    std::vector<double> settled(grid.n_x);
    std::vector<double> recruit(grid.n_x);
    kernels::serial::weighted_age_sums(psi, tables.age_weights(), settled);
    kernels::serial::weighted_age_sums(psi, tables.beta_age_weights(), recruit);
    const double P_unit = integrate_space(grid, settled);

    auto holds = [&](double eps) {
        const double P = eps * P_unit;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            const double first = lambda0 * phi[i] + (tables.beta_at(i, P) - tables.beta_at(i, 0.0)) * recruit[i] -
                                 params.c[i] * eps * phi[i] * phi[i];
            if (!(first >= 0.0)) {
                return false;
            }
            const double dmu = tables.mu_at(i, 0.0) - tables.mu_at(i, P);
            for (double step : tables.mu_age_steps()) {
                if (!(lambda0 + step / grid.dt * dmu >= 0.0)) {
                    return false;
                }
            }
            if (!(tables.chi_at(i, P) >= tables.chi_at(i, 0.0))) {
                return false;
            }
        }
        return true;
    };

    double eps = 1.0;
    std::size_t halvings = 0;
    while (!holds(eps)) {
        eps *= 0.5;
        if (++halvings > 200) {
            throw NumericalError("no epsilon satisfies the sub-solution inequalities");
        }
    }
    pair.epsilon  = eps;
    pair.halvings = halvings;

    SpatialField u_low(grid.n_x);
    AgeField w_low(grid.n_x, grid.n_ages());
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        u_low[i] = eps * phi[i];
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            w_low(i, j) = eps * psi(i, j);
        }
    }
    pair.lower = make_state(params, grid, std::move(u_low), std::move(w_low));
    return pair;
}

double extinction_rate(const ModelParams& params, const Discretization& grid)
{
    if (auto s = growth_bound(params, grid)) {
        return *s;
    }
    auto f = [&](double k) { return principal_eigenvalue(params, grid, k).lambda - k; };
    double lo = -params.mu_lower * (1.0 - 1e-9);
    double hi = 0.0;
    if (!(f(lo) > 0.0)) {
        return -params.mu_lower;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

VerdictReport check_extinction(const ModelParams& params, const Discretization& grid,
                               const ExtinctionOptions& options)
{
    const double r0 = compute_r0(params, grid).value;
    if (banded_sign(r0 - 1.0) >= 0) {
        throw std::invalid_argument("extinction check needs R0 < 1, got " + to_text(r0));
    }
    if (!audit_assumptions(params, grid).holds("A6")) {
        throw std::invalid_argument("extinction check needs A6");
    }

    VerdictReport v;
    v.name      = "extinction";
    v.expected  = 0.0;
    v.tolerance = options.extinct_tol;

    PopulationState initial;
    if (options.initial) {
        initial = *options.initial;
    }
    else {
        AgeField w0(grid.n_x, grid.n_ages());
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            for (std::size_t j = 0; j < grid.n_ages(); ++j) {
                w0(i, j) = std::exp(-grid.age(j));
            }
        }
        initial = make_state(params, grid, SpatialField(grid.n_x, 1.0), std::move(w0));
    }
    const double norm0 = initial.u.max() + initial.P;

    const double lam0 = principal_eigenvalue(params, grid, 0.0).lambda;
    const double rate = extinction_rate(params, grid);
    double t_end      = 0.0;
    if (options.t_end) {
        t_end = *options.t_end;
    }
    else {
        t_end = std::abs(lam0) > 1e-12 ? 50.0 / std::abs(lam0) : 0.0;
        if (rate < 0.0) {
            t_end = std::max(t_end, 10.0 / std::abs(rate));
        }
    }
    v.details = {{"r0", r0}, {"lambda_hat_0", lam0}, {"decay_rate", rate}, {"t_end", t_end}, {"initial_norm", norm0}};

    if (norm0 == 0.0) {
        v.measured = 0.0;
        v.passed   = true;
        v.notes    = "zero initial state";
        return v;
    }
    const Trajectory traj = simulate(params, grid, initial, initial.t + t_end);
    const double norm1    = traj.max_u_series.back() + traj.P_series.back();
    v.measured            = norm1 / norm0;
    v.passed              = v.measured < options.extinct_tol;
    v.details.emplace_back("final_norm", norm1);
    v.notes = "max u + P at t_end over its initial value";
    return v;
}

VerdictReport check_persistence_and_convergence(const ModelParams& params, const Discretization& grid,
                                                const PersistenceOptions& options)
{
    const SpectralReport spec = spectral_report(params, grid);
    if (banded_sign(spec.r0 - 1.0) <= 0) {
        throw std::invalid_argument("persistence check needs R0 > 1, got " + to_text(spec.r0));
    }
    const AssumptionReport audit = audit_assumptions(params, grid);
    if (!audit.a4() || !audit.holds("A7")) {
        throw std::invalid_argument("persistence check needs A4 and A7");
    }
    if (options.relax_age_bound &&
        (grid.finite_horizon || !audit.holds("A6") || !params.chi.density_independent())) {
        throw std::invalid_argument("relaxed age bound needs an infinite horizon, A6 and density-independent chi");
    }

    const SuperSubPair pair      = build_super_sub(params, grid, spec, options.floor);
    const EquilibriumReport eq   = positive_equilibrium(params, grid);
    const double t_end           = options.t_end ? *options.t_end : std::max(30.0, 30.0 / pair.lambda0);

    // generic state strictly between the pair
    PopulationState generic;
    {
        SpatialField u(grid.n_x);
        AgeField w(grid.n_x, grid.n_ages());
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            const double theta = 0.35 + 0.25 * std::cos(pi * grid.x(i) / grid.length);
            u[i] = pair.lower.u[i] + theta * (pair.upper.u[i] - pair.lower.u[i]);
            for (std::size_t j = 0; j < grid.n_ages(); ++j) {
                const double a = grid.age(j);
                w(i, j) = pair.lower.w(i, j) + theta * (pair.upper.w(i, j) - pair.lower.w(i, j));
                if (options.relax_age_bound) {
                    w(i, j) += 0.5 * pair.M2 * theta * params.mu_lower * a * std::exp(-params.mu_lower * a);
                }
            }
        }
        generic = make_state(params, grid, std::move(u), std::move(w));
    }

    const PopulationState* starts[3] = {&pair.upper, &pair.lower, &generic};
    Trajectory runs[3];
    for (int k = 0; k < 3; ++k) {
        runs[k] = simulate(params, grid, *starts[k], t_end);
    }

    double up_rise = 0.0;
    for (std::size_t n = 0; n + 1 < runs[0].max_u_series.size(); ++n) {
        up_rise = std::max(up_rise, runs[0].max_u_series[n + 1] - runs[0].max_u_series[n]);
    }
    double low_drop = 0.0;
    for (std::size_t n = 0; n + 1 < runs[1].max_u_series.size(); ++n) {
        low_drop = std::max(low_drop, runs[1].max_u_series[n] - runs[1].max_u_series[n + 1]);
    }
    const bool monotone = up_rise <= options.monotone_tol && low_drop <= options.monotone_tol;

    double gaps[3];
    for (int k = 0; k < 3; ++k) {
        gaps[k] = relative_gap(runs[k].snapshots.back(), eq);
    }
    const double gap = std::max({gaps[0], gaps[1], gaps[2]});

    const double eps0 = 0.5 * runs[1].min_u_series.back();
    double liminf     = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
        for (std::size_t n = tail_start(r); n < r.min_u_series.size(); ++n) {
            liminf = std::min(liminf, r.min_u_series[n]);
        }
    }
    const bool persists = eps0 > 0.0 && liminf > eps0;

    VerdictReport v;
    v.name      = "persistence";
    v.measured  = gap;
    v.expected  = 0.0;
    v.tolerance = options.convergence_tol;
    v.passed    = monotone && gap <= options.convergence_tol && persists;
    v.details   = {{"r0", spec.r0},
                   {"lambda0", pair.lambda0},
                   {"M1", pair.M1},
                   {"M2", pair.M2},
                   {"epsilon", pair.epsilon},
                   {"t_end", t_end},
                   {"upper_max_rise", up_rise},
                   {"lower_max_drop", low_drop},
                   {"gap_upper", gaps[0]},
                   {"gap_lower", gaps[1]},
                   {"gap_generic", gaps[2]},
                   {"P_star", eq.P_star},
                   {"eps0", eps0},
                   {"tail_min_u", liminf}};
    std::ostringstream notes;
    notes << "monotone " << (monotone ? "yes" : "no") << ", converged " << (gap <= options.convergence_tol ? "yes" : "no")
          << ", persistent " << (persists ? "yes" : "no");
    if (options.relax_age_bound) {
        notes << ", generic start above M exp(-mu_lower a)";
    }
    v.notes = notes.str();
    return v;
}

VerdictReport check_bounds(const ModelParams& params, const Discretization&, const Trajectory& traj)
{
    const auto b = bound_constants(params);
    VerdictReport v;
    v.name      = "bounds";
    v.expected  = 1.0;
    v.tolerance = 0.05;
    double u_tail = 0.0;
    double w_tail = 0.0;
    if (!traj.times.empty()) {
        for (std::size_t n = tail_start(traj); n < traj.times.size(); ++n) {
            u_tail = std::max(u_tail, traj.max_u_series[n]);
            w_tail = std::max(w_tail, traj.max_settled_series[n]);
        }
    }
    const double slack = 1.0 + v.tolerance;
    auto ratio = [](double tail, double bound) {
        if (tail == 0.0) {
            return 0.0;
        }
        return bound > 0.0 ? tail / bound : std::numeric_limits<double>::infinity();
    };
    v.measured = std::max(ratio(u_tail, b.n1), ratio(w_tail, b.n2));
    v.passed   = u_tail <= slack * b.n1 && w_tail <= slack * b.n2;
    v.details  = {{"N1", b.n1}, {"N2", b.n2}, {"tail_max_u", u_tail}, {"tail_max_settled", w_tail}};
    v.notes    = "last-quarter maxima over N1 and N2";
    return v;
}

VerdictReport check_comparison(const ModelParams& params, const Discretization& grid, std::uint64_t seed,
                               const PropertyOptions& options)
{
    if (!audit_assumptions(params, grid).a4()) {
        throw std::invalid_argument("comparison check needs A4");
    }
    Draw draw(seed);
    const auto b       = bound_constants(params);
    const double scale = std::max(b.n1, 1.0) * draw(0.1, 1.5);
    const double mu    = params.mu_lower;

    const SpatialField u1 = cosine_mixture(grid, draw, scale);
    SpatialField du       = cosine_mixture(grid, draw, scale * draw(0.0, 0.5));
    const SpatialField f1 = cosine_mixture(grid, draw, scale);
    const SpatialField f2 = cosine_mixture(grid, draw, scale * draw(0.0, 0.5));
    const double r1       = mu * draw(1.0, 2.0);
    const double r2       = mu * draw(1.0, 2.0);

    SpatialField u2(grid.n_x);
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        u2[i] = u1[i] + du[i];
    }
    AgeField w1 = separable(grid, f1, r1);
    AgeField w2 = separable(grid, f2, r2);
    for (std::size_t k = 0; k < w2.flat().size(); ++k) {
        w2.flat()[k] += w1.flat()[k];
    }

    PopulationState lo = make_state(params, grid, u1, std::move(w1));
    PopulationState hi = make_state(params, grid, std::move(u2), std::move(w2));
    StepperOptions so;
    so.policy = kernels::Policy::serial;
    Stepper step_lo(params, grid, so);
    Stepper step_hi(params, grid, so);

    double worst = 0.0;
    std::size_t first_bad = 0;
    for (std::size_t n = 1; n <= options.n_steps; ++n) {
        step_lo.advance(lo);
        step_hi.advance(hi);
        double d = 0.0;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            d = std::max(d, lo.u[i] - hi.u[i]);
        }
        for (std::size_t k = 0; k < lo.w.flat().size(); ++k) {
            d = std::max(d, lo.w.flat()[k] - hi.w.flat()[k]);
        }
        if (d > options.tolerance && first_bad == 0) {
            first_bad = n;
        }
        worst = std::max(worst, d);
    }

    VerdictReport v;
    v.name      = "comparison";
    v.measured  = worst;
    v.expected  = 0.0;
    v.tolerance = options.tolerance;
    v.passed    = worst <= options.tolerance;
    v.details   = {{"seed", static_cast<double>(seed)},
                   {"steps", static_cast<double>(options.n_steps)},
                   {"first_violation_step", static_cast<double>(first_bad)}};
    v.notes     = "largest entry of lower minus upper over all steps";
    return v;
}

VerdictReport check_positivity(const ModelParams& params, const Discretization& grid, std::uint64_t seed,
                               const PropertyOptions& options)
{
    Draw draw(seed);
    const auto b       = bound_constants(params);
    const double scale = std::max(b.n1, 1.0) * draw(0.1, 2.0);
    // shifted mixtures reach zero on part of the domain
    SpatialField u  = cosine_mixture(grid, draw, scale);
    SpatialField f  = cosine_mixture(grid, draw, scale);
    const double su = draw(0.0, 1.0) * u.max();
    const double sf = draw(0.0, 1.0) * f.max();
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        u[i] = std::max(u[i] - su, 0.0);
        f[i] = std::max(f[i] - sf, 0.0);
    }
    PopulationState s = make_state(params, grid, std::move(u), separable(grid, f, params.mu_lower * draw(1.0, 2.0)));

    StepperOptions so;
    so.policy = kernels::Policy::serial;
    Stepper stepper(params, grid, so);
    double lowest = 0.0;
    std::string failure;
    try {
        for (std::size_t n = 1; n <= options.n_steps; ++n) {
            stepper.advance(s);
            lowest = std::min(lowest, s.u.min());
            for (double x : s.w.flat()) {
                lowest = std::min(lowest, x);
            }
        }
    }
    catch (const NumericalError& e) {
        // the stepper rejects entries below its own negativity threshold
        lowest  = -std::numeric_limits<double>::infinity();
        failure = e.what();
    }

    VerdictReport v;
    v.name      = "positivity";
    v.measured  = 0.0 - lowest;
    v.expected  = 0.0;
    v.tolerance = options.tolerance;
    v.passed    = -lowest <= options.tolerance;
    v.details   = {{"seed", static_cast<double>(seed)},
                   {"steps", static_cast<double>(options.n_steps)},
                   {"clamped", static_cast<double>(s.clamped)}};
    v.notes     = failure.empty() ? "most negative entry of u or w over all steps, after clamping round-off" : failure;
    return v;
}

std::vector<VerdictReport> run_suite(const ModelParams& params, const Discretization& grid,
                                     const SuiteOptions& options)
{
    const double r0              = compute_r0(params, grid).value;
    const AssumptionReport audit = audit_assumptions(params, grid);
    const int side               = banded_sign(r0 - 1.0);

    enum class Kind { extinction, persistence, bounds, comparison, positivity };
    std::vector<Kind> kinds;
    if (options.extinction) {
        kinds.push_back(Kind::extinction);
    }
    if (options.persistence) {
        kinds.push_back(Kind::persistence);
    }
    if (options.bounds) {
        kinds.push_back(Kind::bounds);
    }
    if (options.comparison) {
        kinds.push_back(Kind::comparison);
    }
    if (options.positivity) {
        kinds.push_back(Kind::positivity);
    }

    std::vector<VerdictReport> out(kinds.size());
    std::vector<std::exception_ptr> errors(kinds.size());

    auto run_one = [&](Kind kind) -> VerdictReport {
        switch (kind) {
        case Kind::extinction:
            if (side >= 0) {
                return skipped("extinction", r0_reason(r0));
            }
            if (!audit.holds("A6")) {
                return skipped("extinction", "A6 audit fails");
            }
            return check_extinction(params, grid, options.extinction_options);
        case Kind::persistence:
            if (side <= 0) {
                return skipped("persistence", r0_reason(r0));
            }
            if (!audit.a4()) {
                return skipped("persistence", "A4 audit fails");
            }
            if (!audit.holds("A7")) {
                return skipped("persistence", "A7 audit fails");
            }
            return check_persistence_and_convergence(params, grid, options.persistence_options);
        case Kind::bounds: {
            AgeField w0(grid.n_x, grid.n_ages());
            for (std::size_t i = 0; i < grid.n_x; ++i) {
                for (std::size_t j = 0; j < grid.n_ages(); ++j) {
                    w0(i, j) = std::exp(-params.mu_lower * grid.age(j));
                }
            }
            const auto init = make_state(params, grid, SpatialField(grid.n_x, 1.0), std::move(w0));
            return check_bounds(params, grid, simulate(params, grid, init, options.bounds_t_end));
        }
        case Kind::comparison:
            if (!audit.a4()) {
                return skipped("comparison", "A4 audit fails");
            }
            return check_comparison(params, grid, options.seed, options.property_options);
        case Kind::positivity:
            return check_positivity(params, grid, options.seed, options.property_options);
        }
        return {};
    };

    const auto n = static_cast<long>(kinds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
        try {
            out[static_cast<std::size_t>(k)] = run_one(kinds[static_cast<std::size_t>(k)]);
        }
        catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

bool suite_passed(const std::vector<VerdictReport>& verdicts)
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const VerdictReport& v) { return v.skipped || v.passed; });
}

std::string format_table(const std::vector<VerdictReport>& verdicts)
{
    std::ostringstream os;
    os << std::left << std::setw(13) << "check" << std::setw(9) << "verdict" << std::setw(25) << "measured"
       << std::setw(25) << "expected" << std::setw(25) << "tolerance" << "notes\n";
    for (const auto& v : verdicts) {
        os << std::setw(13) << v.name;
        if (v.skipped) {
            os << std::setw(9) << "SKIP" << std::setw(75) << "" << v.skip_reason << '\n';
            continue;
        }
        os << std::setw(9) << (v.passed ? "PASS" : "FAIL") << std::setw(25) << to_text(v.measured) << std::setw(25)
           << to_text(v.expected) << std::setw(25) << to_text(v.tolerance) << v.notes << '\n';
    }
    return os.str();
}

} // namespace hybridpop
