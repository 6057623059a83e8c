#pragma once

#include "hybridpop/fields.hpp"
#include "hybridpop/rates.hpp"
#include "hybridpop/tridiagonal.hpp"

#include <cstddef>
#include <vector>

namespace hybridpop
{

/// Uniform grid on [0, L] (Neumann) and age lattice on [0, A] locked to the time step.
///
/// Ages are stored on the n_a + 1 nodes a_j = j * dt, j = 0..n_a. Node 0 is the
/// renewal boundary; the content of node n_a leaves the lattice on the next step.
/// Spatial quadrature is trapezoidal; age quadrature is trapezoidal on the nodes,
/// which integrates constants over [0, A] exactly.
struct Discretization {
    double length = 1.0;
    std::size_t n_x = 3;
    double dx = 0.5;
    double horizon = 1.0; // A
    std::size_t n_a = 1;  // age cells
    double dt = 1.0;      // equals the age step
    bool finite_horizon = true;
    double tail_tol = 1e-8;

    std::size_t n_ages() const { return n_a + 1; }
    double x(std::size_t i) const { return dx * static_cast<double>(i); }
    double age(std::size_t j) const { return dt * static_cast<double>(j); }

    std::vector<double> space_weights() const;
    std::vector<double> age_weights() const;
};

/// Horizon A = a_max when finite (dt shrunk so that A / dt is an integer), otherwise the
/// smallest multiple of dt with exp(-mu_lower A) < tail_tol.
/// Throws ConfigError on n_x < 3, dt <= 0, dt > a_max, or n_x differing from the params sampling.
Discretization build_grid(const ModelParams& params, std::size_t n_x, double dt, double tail_tol = 1e-8);

/// Second difference with reflecting ghost nodes (homogeneous Neumann).
SpatialField laplacian_apply(const Discretization& grid, const SpatialField& u);

/// The same stencil as a matrix, multiplied by `coefficient`.
Tridiagonal neumann_laplacian(const Discretization& grid, double coefficient = 1.0);

/// Trapezoid-weighted integral over [0, L].
double integrate_space(const Discretization& grid, std::span<const double> values);

} // namespace hybridpop
