#include "hybridpop/spectral.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/tables.hpp"
#include "hybridpop/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hybridpop
{
namespace
{

constexpr double eps = std::numeric_limits<double>::epsilon();

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += w[i] * a[i] * b[i];
    }
    return s;
}

void normalize_max(std::vector<double>& v)
{
    const double top = *std::max_element(v.begin(), v.end());
    for (double& x : v) {
        x /= top;
    }
}

SpatialField net_potential(const ModelParams& params, const SpatialField& K, const SpatialField& loss)
{
    SpatialField q(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) {
        q[i] = K[i] - params.m[i] - loss[i];
    }
    return q;
}

} // namespace

EigenPair principal_eigenpair(const Discretization& grid, double diffusion, const SpatialField& potential,
                              const EigenOptions& options)
{
    const std::size_t n = grid.n_x;
    if (potential.size() != n) {
        throw std::invalid_argument("potential length does not match the grid");
    }
    Tridiagonal op = neumann_laplacian(grid, diffusion);
    op.add_diagonal(potential.span());
    const double floor = std::max(options.tol, 16.0 * eps * op.norm_inf());
    const auto weights = grid.space_weights();

    std::vector<double> phi(n, 1.0), y(n), z(n);
    Tridiagonal shifted(n);
    for (std::size_t i = 0; i < n; ++i) {
        shifted.lower[i] = -op.lower[i];
        shifted.upper[i] = -op.upper[i];
    }

    EigenPair out;
    for (std::size_t it = 0; it <= options.max_iter; ++it) {
        op.apply(phi, y);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] / phi[i];
            lo             = std::min(lo, r);
            hi             = std::max(hi, r);
        }
        const double lambda = weighted_dot(weights, phi, y) / weighted_dot(weights, phi, phi);
        double residual     = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            residual = std::max(residual, std::abs(y[i] - lambda * phi[i]));
        }
        if (residual < floor) {
            out.lambda     = lambda;
            out.phi        = SpatialField(phi);
            out.iterations = it;
            out.residual   = residual;
            return out;
        }
        const double sigma = hi + std::max(hi - lo, 1e-8 * (1.0 + std::abs(hi)));
        for (std::size_t i = 0; i < n; ++i) {
            shifted.diag[i] = sigma - op.diag[i];
        }
        shifted.solve(phi, z);
        phi = z;
        normalize_max(phi);
        for (double v : phi) {
            if (!(v > 0.0)) {
                throw NumericalError("principal eigenvector lost positivity");
            }
        }
    }
    throw NumericalError("principal eigenpair did not converge in " + std::to_string(options.max_iter) +
                         " iterations");
}

SpatialField kernel_K(const ModelParams& params, const Discretization& grid, double k, kernels::Policy policy)
{
    if (!grid.finite_horizon && !(k > -params.mu_lower)) {
        throw std::invalid_argument("discounted recruitment diverges for k <= -mu_lower on an infinite horizon");
    }
    RateTables tables(params, grid);
    return tables.discounted_recruitment(0.0, k, policy);
}

EigenPair principal_eigenvalue(const ModelParams& params, const Discretization& grid, double k,
                               const EigenOptions& options)
{
    return principal_eigenpair(grid, params.diffusion, net_potential(params, kernel_K(params, grid, k), params.e),
                               options);
}

R0Result compute_r0(const ModelParams& params, const Discretization& grid, const EigenOptions& options)
{
    const std::size_t n = grid.n_x;
    const SpatialField K = kernel_K(params, grid, 0.0);
    R0Result out;
    if (K.max() == 0.0) {
        out.psi = SpatialField(n, 1.0);
        return out;
    }
    Tridiagonal M = neumann_laplacian(grid, -params.diffusion);
    double loss_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        M.diag[i] += params.m[i] + params.resolvent_settlement[i];
        loss_max = std::max(loss_max, params.m[i] + params.resolvent_settlement[i]);
    }
    if (!(loss_max > 0.0)) {
        throw NumericalError("m + s vanishes identically, the resolvent is undefined");
    }

    const auto weights = grid.space_weights();
    std::vector<double> psi(n, 1.0), phi(n), y(n);
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        M.solve(psi, phi);
        double top = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = K[i] * phi[i];
            top  = std::max(top, y[i]);
        }
        // Rayleigh quotient of K phi = R M phi, symmetric under the trapezoid weights
        const double R = weighted_dot(weights, phi, y) / weighted_dot(weights, phi, psi);
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            residual = std::max(residual, std::abs(y[i] - R * psi[i]));
        }
        residual /= top;
        psi = y;
        normalize_max(psi);
        if (residual < options.tol) {
            out.value      = R;
            out.psi        = SpatialField(psi);
            out.iterations = it;
            out.residual   = residual;
            return out;
        }
    }
    throw NumericalError("R0 power iteration did not converge in " + std::to_string(options.max_iter) +
                         " iterations");
}

double r0_by_threshold(const ModelParams& params, const Discretization& grid, const EigenOptions& options)
{
    const SpatialField K = kernel_K(params, grid, 0.0);
    if (K.max() == 0.0) {
        return 0.0;
    }
    const auto weights = grid.space_weights();
    auto at = [&](double theta) {
        SpatialField q(grid.n_x);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            q[i] = theta * K[i] - params.m[i] - params.resolvent_settlement[i];
        }
        return principal_eigenpair(grid, params.diffusion, q, options);
    };

    double lo = 0.0;
    double hi = 1.0;
    EigenPair e = at(hi);
    while (e.lambda <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) {
            throw NumericalError("threshold bracket failed");
        }
        e = at(hi);
    }
    // safeguarded Newton; d lambda / d theta = <phi, K phi> / <phi, phi>
    double theta = hi;
    for (int it = 0; it < 200; ++it) {
        if (e.lambda == 0.0) {
            return 1.0 / theta;
        }
        if (e.lambda > 0.0) {
            hi = theta;
        }
        else {
            lo = theta;
        }
        std::vector<double> Kphi(grid.n_x);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            Kphi[i] = K[i] * e.phi[i];
        }
        const double slope = weighted_dot(weights, e.phi.span(), Kphi) / weighted_dot(weights, e.phi.span(), e.phi.span());
        double next        = theta - e.lambda / slope;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - theta) <= 1e-13 * theta || hi - lo <= 1e-15 * hi) {
            return 1.0 / next;
        }
        theta = next;
        e     = at(theta);
    }
    return 1.0 / theta;
}

std::optional<double> growth_bound(const ModelParams& params, const Discretization& grid, double root_tol,
                                   const EigenOptions& options)
{
    const double lam0 = principal_eigenvalue(params, grid, 0.0, options).lambda;
    if (lam0 == 0.0) {
        return 0.0;
    }
    if (lam0 < 0.0 && !grid.finite_horizon) {
        return std::nullopt;
    }
    double lo = std::min(lam0, 0.0);
    double hi = std::max(lam0, 0.0);
    auto g    = [&](double k) { return principal_eigenvalue(params, grid, k, options).lambda - k; };
    if (g(lo) < 0.0 || g(hi) > 0.0) {
        throw NumericalError("growth bound bracket failed: lambda_hat_0(k) - k is not decreasing");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm  = g(mid);
        if (gm == 0.0 || (std::abs(gm) < root_tol && hi - lo < root_tol)) {
            return mid;
        }
        if (gm > 0.0) {
            lo = mid;
        }
        else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * eps * std::max(1.0, std::abs(mid))) {
            return mid;
        }
    }
    return 0.5 * (lo + hi);
}

AgeField eigenfunction_pair(const ModelParams& params, const Discretization& grid, double lambda0,
                            const SpatialField& phi)
{
    if (phi.size() != grid.n_x) {
        throw std::invalid_argument("eigenfunction length does not match the grid");
    }
    RateTables tables(params, grid);
    AgeField out(grid.n_x, grid.n_ages());
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        const auto S    = tables.cumulative_survival(i, 0.0);
        const double a0 = tables.chi_at(i, 0.0) * params.e[i] * phi[i];
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            out(i, j) = a0 * S[j] * std::exp(-lambda0 * grid.age(j));
        }
    }
    return out;
}

int banded_sign(double value, double band)
{
    if (std::abs(value) < band) {
        return 0;
    }
    return value > 0.0 ? 1 : -1;
}

SpectralReport spectral_report(const ModelParams& params, const Discretization& grid, const SpectralOptions& options)
{
    SpectralReport rep;
    const auto r0    = compute_r0(params, grid, options.eigen);
    rep.r0           = r0.value;
    rep.r0_threshold = r0_by_threshold(params, grid, options.eigen);
    const auto e0    = principal_eigenvalue(params, grid, 0.0, options.eigen);
    rep.lambda_hat_0 = e0.lambda;
    rep.s_L0         = growth_bound(params, grid, options.root_tol, options.eigen);
    rep.iterations   = r0.iterations + e0.iterations;
    rep.residual     = e0.residual;
    if (rep.s_L0) {
        const auto es = principal_eigenvalue(params, grid, *rep.s_L0, options.eigen);
        rep.phi       = es.phi;
        rep.phi_age   = eigenfunction_pair(params, grid, *rep.s_L0, es.phi);
        rep.iterations += es.iterations;
        rep.residual = std::max(rep.residual, es.residual);
    }
    else {
        rep.phi = e0.phi;
    }
    for (double k : options.k_samples) {
        if (!grid.finite_horizon && !(k > -params.mu_lower)) {
            continue;
        }
        rep.lambda_samples.emplace_back(k, principal_eigenvalue(params, grid, k, options.eigen).lambda);
    }
    rep.sign_consistent = banded_sign(rep.r0 - 1.0) == banded_sign(rep.lambda_hat_0);
    return rep;
}

std::string format_report(const SpectralReport& r)
{
    std::ostringstream os;
    os << "r0: " << to_text(r.r0) << '\n';
    os << "r0_threshold: " << to_text(r.r0_threshold) << '\n';
    os << "lambda_hat_0: " << to_text(r.lambda_hat_0) << '\n';
    os << "s_L0: " << (r.s_L0 ? to_text(*r.s_L0) : std::string("absent")) << '\n';
    os << "sign_consistent: " << (r.sign_consistent ? "true" : "false") << '\n';
    os << "phi_min: " << to_text(r.phi.min()) << '\n';
    os << "phi_max: " << to_text(r.phi.max()) << '\n';
    os << "iterations: " << r.iterations << '\n';
    os << "residual: " << to_text(r.residual) << '\n';
    return os.str();
}

} // namespace hybridpop
