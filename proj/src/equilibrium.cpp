#include "hybridpop/equilibrium.hpp"
#include "hybridpop/audit.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/tables.hpp"
#include "hybridpop/text.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybridpop
{
namespace
{

double sup_norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) {
        s = std::max(s, std::abs(x));
    }
    return s;
}

struct Problem {
    Tridiagonal lap; // d Lap
    SpatialField r;  // K_P - m - e
    SpatialField c;

    void residual(const SpatialField& u, std::vector<double>& out) const
    {
        lap.apply(u.span(), out);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += r[i] * u[i] - c[i] * u[i] * u[i];
        }
    }
};

Problem make_problem(const RateTables& tables, double P)
{
    const auto& params = tables.params();
    const auto& grid   = tables.grid();
    Problem pb{neumann_laplacian(grid, params.diffusion), tables.discounted_recruitment(P, 0.0), params.c};
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        pb.r[i] -= params.m[i] + params.e[i];
    }
    return pb;
}

FkppSolution solve(const RateTables& tables, double P, const FkppOptions& opt)
{
    const auto& params  = tables.params();
    const auto& grid    = tables.grid();
    const std::size_t n = grid.n_x;
    if (!(P >= 0.0)) {
        throw std::invalid_argument("P must be nonnegative");
    }
    if (!(params.c.min() > 0.0)) {
        throw NumericalError("competition must be positive at every node for the elliptic problem");
    }
    const Problem pb = make_problem(tables, P);

    FkppSolution sol;
    sol.principal_eigenvalue = principal_eigenpair(grid, params.diffusion, pb.r, opt.eigen).lambda;
    if (sol.principal_eigenvalue <= opt.degenerate_band) {
        sol.u = SpatialField(n);
        return sol;
    }

    const double upper = std::max(pb.r.max(), 0.0) / params.c.min() + 1.0;
    const double floor = std::max(opt.residual_tol, 64.0 * 2.220446049250313e-16 * pb.lap.norm_inf() * upper);

    // Newton; iterates from the upper solution stay above the maximal solution
    SpatialField u(n, upper);
    std::vector<double> F(n), Ftrial(n), delta(n), minus_F(n);
    pb.residual(u, F);
    double norm = sup_norm(F);
    Tridiagonal J = pb.lap;
    bool converged = norm < floor;
    std::size_t it = 0;
    for (; it < opt.max_newton && !converged; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            J.diag[i]  = pb.lap.diag[i] + pb.r[i] - 2.0 * pb.c[i] * u[i];
            minus_F[i] = -F[i];
        }
        J.solve(minus_F, delta);
        double step = 1.0;
        bool accepted = false;
        SpatialField trial(n);
        for (int half = 0; half < 40; ++half) {
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = std::max(u[i] + step * delta[i], 0.0);
            }
            pb.residual(trial, Ftrial);
            const double tn = sup_norm(Ftrial);
            if (tn < norm || tn < floor) {
                accepted = true;
                u        = trial;
                F.swap(Ftrial);
                norm = tn;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        converged = norm < floor;
    }
    sol.iterations = it;

    if (!converged || u.min() <= 0.0) {
        // monotone iteration from the upper solution: (gamma - d Lap) u+ = (gamma + r) u - c u^2
        sol.used_fallback = true;
        double gamma      = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gamma = std::max(gamma, 2.0 * pb.c[i] * upper - pb.r[i]);
        }
        gamma += 1.0;
        Tridiagonal M = pb.lap.scaled(-1.0);
        M.add_diagonal(gamma);
        u = SpatialField(n, upper);
        std::vector<double> rhs(n);
        SpatialField next(n);
        double prev_change = std::numeric_limits<double>::infinity();
        std::size_t stall  = 0;
        for (std::size_t k = 0; k < opt.max_monotone; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                rhs[i] = (gamma + pb.r[i]) * u[i] - pb.c[i] * u[i] * u[i];
            }
            M.solve(rhs, next.span());
            double change = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                change = std::max(change, std::abs(next[i] - u[i]));
            }
            u = next;
            ++sol.iterations;
            pb.residual(u, F);
            norm = sup_norm(F);
            if (norm < floor) {
                converged = true;
                break;
            }
            stall       = change >= prev_change ? stall + 1 : 0;
            prev_change = change;
            if (change == 0.0 || stall > 1000) {
                break;
            }
        }
        if (!converged) {
            throw NumericalError("elliptic solve stagnated at P = " + to_text(P) + " with residual " + to_text(norm));
        }
    }
    sol.u        = u;
    sol.residual = norm;
    return sol;
}

double H_of(const RateTables& tables, const SpatialField& u, double P)
{
    const SpatialField life = tables.settled_lifetime(P);
    std::vector<double> prod(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        prod[i] = life[i] * u[i];
    }
    return integrate_space(tables.grid(), prod);
}

} // namespace

FkppSolution solve_fkpp(const ModelParams& params, const Discretization& grid, double P, const FkppOptions& options)
{
    return solve(RateTables(params, grid), P, options);
}

double fkpp_residual(const ModelParams& params, const Discretization& grid, double P, const SpatialField& u)
{
    const Problem pb = make_problem(RateTables(params, grid), P);
    std::vector<double> F(grid.n_x);
    pb.residual(u, F);
    return sup_norm(F);
}

double H_map(const ModelParams& params, const Discretization& grid, double P, const FkppOptions& options)
{
    const RateTables tables(params, grid);
    return H_of(tables, solve(tables, P, options).u, P);
}

EquilibriumReport positive_equilibrium(const ModelParams& params, const Discretization& grid,
                                       const EquilibriumOptions& options)
{
    EquilibriumReport rep;
    const RateTables tables(params, grid);
    rep.r0 = compute_r0(params, grid, options.fkpp.eigen).value;
    rep.u_star = SpatialField(grid.n_x);
    rep.w_star = AgeField(grid.n_x, grid.n_ages());
    if (rep.r0 <= 1.0) {
        rep.note = "R0 <= 1: only the trivial equilibrium";
        return rep;
    }
    rep.uniqueness_verified = audit_assumptions(params, grid).holds("A7");
    if (!rep.uniqueness_verified) {
        rep.note = "uniqueness unverified (A7 audit fails)";
    }

    auto H = [&](double P) {
        auto sol = solve(tables, P, options.fkpp);
        double h = H_of(tables, sol.u, P);
        rep.H_samples.emplace_back(P, h);
        return std::make_pair(h, std::move(sol));
    };

    const bool P_free = params.beta.density_independent() && params.mu.density_independent() &&
                        params.chi.density_independent();
    double P_star = 0.0;
    FkppSolution sol;
    if (P_free) {
        std::tie(P_star, sol) = H(0.0);
    }
    else {
        auto [h0, s0] = H(0.0);
        if (!(h0 > 0.0)) {
            throw NumericalError("H(0) vanishes although R0 > 1");
        }
        double lo  = 0.0;
        double hi  = std::max(bound_constants(params).n2, 1e-8);
        if (!std::isfinite(hi)) {
            hi = 1.0;
        }
        auto probe = H(hi);
        while (probe.first >= hi) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e300) {
                throw NumericalError("fixed point bracket failed");
            }
            probe = H(hi);
        }
        sol    = std::move(probe.second);
        P_star = hi;
        for (std::size_t it = 0; it < options.max_bisection; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto [h, s]      = H(mid);
            const double g   = h - mid;
            P_star           = mid;
            sol              = std::move(s);
            if (std::abs(g) < options.fp_tol || hi - lo <= 4.0 * 2.220446049250313e-16 * mid) {
                break;
            }
            if (g > 0.0) {
                lo = mid;
            }
            else {
                hi = mid;
            }
        }
        std::sort(rep.H_samples.begin(), rep.H_samples.end());
    }

    rep.positive = P_star > 0.0;
    rep.P_star   = P_star;
    rep.u_star   = sol.u;
    rep.fkpp_residual = sol.residual;
    rep.fixed_point_residual = std::abs(H_of(tables, sol.u, P_star) - P_star);
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        const auto S    = tables.cumulative_survival(i, P_star);
        const double w0 = tables.chi_at(i, P_star) * params.e[i] * sol.u[i];
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            rep.w_star(i, j) = w0 * S[j];
        }
    }
    std::vector<double> settled(grid.n_x);
    kernels::serial::weighted_age_sums(rep.w_star, tables.age_weights(), settled);
    rep.mass_residual = std::abs(integrate_space(grid, settled) - P_star);
    return rep;
}

std::string format_report(const EquilibriumReport& r)
{
    std::ostringstream os;
    os << "positive: " << (r.positive ? "true" : "false") << '\n';
    os << "r0: " << to_text(r.r0) << '\n';
    os << "P_star: " << (r.positive ? to_text(r.P_star) : std::string("absent")) << '\n';
    os << "u_star_min: " << to_text(r.u_star.min()) << '\n';
    os << "u_star_max: " << to_text(r.u_star.max()) << '\n';
    os << "fkpp_residual: " << to_text(r.fkpp_residual) << '\n';
    os << "fixed_point_residual: " << to_text(r.fixed_point_residual) << '\n';
    os << "mass_residual: " << to_text(r.mass_residual) << '\n';
    os << "uniqueness_verified: " << (r.uniqueness_verified ? "true" : "false") << '\n';
    os << "H_evaluations: " << r.H_samples.size() << '\n';
    if (!r.note.empty()) {
        os << "note: " << r.note << '\n';
    }
    return os.str();
}

} // namespace hybridpop
