#pragma once

#include "hybridpop/grid.hpp"
#include "hybridpop/rates.hpp"

#include <cstddef>

namespace hybridpop::testing
{

/// chi = e = m = c = mu = 1, d = 1, L = 1, beta = beta0 constant, a_max infinite.
inline ModelSpec constant_spec(double beta0)
{
    ModelSpec s;
    s.beta.spatial = spatial::Constant{beta0};
    return s;
}

/// The persistence benchmark: beta = 6 / (1 + P).
inline ModelSpec saturating_spec()
{
    ModelSpec s    = constant_spec(6.0);
    s.beta.density = density::Saturating{1.0};
    return s;
}

struct Setup {
    ModelParams params;
    Discretization grid;
};

inline Setup setup(const ModelSpec& spec, std::size_t n_x, double dt, double tail_tol = 1e-8)
{
    Setup s{instantiate(spec, n_x), {}};
    s.grid = build_grid(s.params, n_x, dt, tail_tol);
    return s;
}

} // namespace hybridpop::testing
