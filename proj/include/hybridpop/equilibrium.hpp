#pragma once

#include "hybridpop/fields.hpp"
#include "hybridpop/grid.hpp"
#include "hybridpop/rates.hpp"
#include "hybridpop/spectral.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace hybridpop
{

struct FkppOptions {
    double residual_tol       = 1e-11; // sup norm of the elliptic residual
    std::size_t max_newton    = 100;
    std::size_t max_monotone  = 2000000;
    double degenerate_band    = 1e-10; // principal eigenvalue at or below this means u_P = 0
    EigenOptions eigen;
};

struct FkppSolution {
    SpatialField u;
    double residual            = 0.0;
    double principal_eigenvalue = 0.0;
    std::size_t iterations     = 0;
    bool used_fallback         = false;
};

/// Maximal nonnegative solution of d Lap u + (K_P - m - e) u - c u^2 = 0 with Neumann ends.
/// Damped Newton from the constant upper solution, monotone iteration if Newton stalls.
/// Throws NumericalError if both stagnate or c vanishes somewhere.
FkppSolution solve_fkpp(const ModelParams& params, const Discretization& grid, double P,
                        const FkppOptions& options = {});

/// sup norm of d Lap u + (K_P - m - e) u - c u^2.
double fkpp_residual(const ModelParams& params, const Discretization& grid, double P, const SpatialField& u);

/// H(P): space-age quadrature of chi(x,P) e(x) u_P(x) S(x,a,P).
double H_map(const ModelParams& params, const Discretization& grid, double P, const FkppOptions& options = {});

struct EquilibriumOptions {
    double fp_tol = 1e-12;
    FkppOptions fkpp;
    std::size_t max_bisection = 200;
};

struct EquilibriumReport {
    bool positive = false;          // false: trivial equilibrium only (R0 <= 1)
    bool uniqueness_verified = true; // A7 audit outcome
    double r0 = 0.0;
    double P_star = 0.0;
    SpatialField u_star;
    AgeField w_star;
    double fkpp_residual        = 0.0;
    double fixed_point_residual = 0.0;
    /// |quadrature of w_star - P_star|
    double mass_residual = 0.0;
    std::vector<std::pair<double, double>> H_samples;
    std::string note;
};

/// Bisection for H(P) = P on [0, P_hi], P_hi doubled from N2 until H(P_hi) < P_hi;
/// w* rebuilt from u* along the survival profile at P*.
EquilibriumReport positive_equilibrium(const ModelParams& params, const Discretization& grid,
                                       const EquilibriumOptions& options = {});

std::string format_report(const EquilibriumReport& report);

} // namespace hybridpop
