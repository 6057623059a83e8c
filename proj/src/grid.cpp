#include "hybridpop/grid.hpp"
#include "hybridpop/error.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridpop
{

std::vector<double> Discretization::space_weights() const
{
    std::vector<double> w(n_x, dx);
    w.front() = 0.5 * dx;
    w.back()  = 0.5 * dx;
    return w;
}

std::vector<double> Discretization::age_weights() const
{
    std::vector<double> w(n_ages(), dt);
    w.front() = 0.5 * dt;
    w.back()  = 0.5 * dt;
    return w;
}

Discretization build_grid(const ModelParams& params, std::size_t n_x, double dt, double tail_tol)
{
    if (n_x < 3) {
        throw ConfigError("at least 3 spatial nodes are required");
    }
    if (n_x != params.n_x()) {
        throw ConfigError("model parameters were sampled on " + std::to_string(params.n_x()) + " nodes, grid requests " +
                          std::to_string(n_x));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("time step must be positive");
    }
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
        throw ConfigError("tail tolerance must lie in (0, 1)");
    }

    Discretization g;
    g.length   = params.length;
    g.n_x      = n_x;
    g.dx       = params.length / static_cast<double>(n_x - 1);
    g.tail_tol = tail_tol;

    if (params.finite_horizon()) {
        if (dt > params.a_max) {
            throw ConfigError("time step exceeds a_max");
        }
        g.finite_horizon = true;
        g.horizon        = params.a_max;
        g.n_a            = static_cast<std::size_t>(std::ceil(params.a_max / dt - 1e-9));
        g.dt             = params.a_max / static_cast<double>(g.n_a);
    }
    else {
        g.finite_horizon = false;
        double needed    = std::log(1.0 / tail_tol) / params.mu_lower;
        g.n_a            = static_cast<std::size_t>(std::floor(needed / dt)) + 1;
        g.dt             = dt;
        g.horizon        = dt * static_cast<double>(g.n_a);
    }
    return g;
}

SpatialField laplacian_apply(const Discretization& grid, const SpatialField& u)
{
    if (u.size() != grid.n_x) {
        throw std::invalid_argument("field length does not match the grid");
    }
    const std::size_t n = grid.n_x;
    const double inv    = 1.0 / (grid.dx * grid.dx);
    SpatialField out(n);
    out[0] = 2.0 * (u[1] - u[0]) * inv;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
    }
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
    return out;
}

Tridiagonal neumann_laplacian(const Discretization& grid, double coefficient)
{
    const std::size_t n = grid.n_x;
    const double s      = coefficient / (grid.dx * grid.dx);
    Tridiagonal t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.diag[i]  = -2.0 * s;
        t.lower[i] = s;
        t.upper[i] = s;
    }
    t.upper[0]     = 2.0 * s;
    t.lower[n - 1] = 2.0 * s;
    t.lower[0]     = 0.0;
    t.upper[n - 1] = 0.0;
    return t;
}

double integrate_space(const Discretization& grid, std::span<const double> values)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        double w = (i == 0 || i + 1 == grid.n_x) ? 0.5 * grid.dx : grid.dx;
        sum += w * values[i];
    }
    return sum;
}

} // namespace hybridpop
