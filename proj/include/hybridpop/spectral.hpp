#pragma once

#include "hybridpop/fields.hpp"
#include "hybridpop/grid.hpp"
#include "hybridpop/kernels.hpp"
#include "hybridpop/rates.hpp"
#include "hybridpop/tridiagonal.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hybridpop
{

struct EigenOptions {
    double tol           = 1e-10; // on the eigenvector residual, sup norm
    std::size_t max_iter = 100000;
};

struct EigenPair {
    double lambda = 0.0;
    SpatialField phi; // positive, max-normalized
    std::size_t iterations = 0;
    double residual        = 0.0;
};

/// Principal eigenpair of d Lap + diag(potential) with Neumann ends.
///
/// The operator has nonnegative off-diagonals, so (sigma - Op)^{-1} is positive for
/// sigma above the spectrum and inverse iteration converges to the positive eigenvector.
/// The shift follows the Collatz-Wielandt upper bound max_i (Op phi)_i / phi_i, which
/// stays above lambda and closes in on it as phi converges.
/// Throws NumericalError after max_iter iterations.
EigenPair principal_eigenpair(const Discretization& grid, double diffusion, const SpatialField& potential,
                              const EigenOptions& options = {});

/// K_k(x) = chi(x,0) e(x) sum_j alpha_j beta(x,a_j,0) S_j(x,0) exp(-k a_j).
/// Throws std::invalid_argument for k <= -mu_lower on an infinite horizon.
SpatialField kernel_K(const ModelParams& params, const Discretization& grid, double k,
                      kernels::Policy policy = kernels::Policy::parallel);

/// lambda_hat_0(k): principal eigenvalue of d Lap + K_k - m - e.
EigenPair principal_eigenvalue(const ModelParams& params, const Discretization& grid, double k,
                               const EigenOptions& options = {});

struct R0Result {
    double value = 0.0;
    SpatialField psi; // eigenvector of diag(K_0) (m + s - d Lap)^{-1}, max-normalized
    std::size_t iterations = 0;
    double residual        = 0.0; // relative
};

/// Spectral radius of R1 = diag(K_0) (m + s - d Lap)^{-1} by power iteration.
/// s is params.resolvent_settlement (e unless overridden).
R0Result compute_r0(const ModelParams& params, const Discretization& grid, const EigenOptions& options = {});

/// Independent route: theta* with principal eigenvalue of d Lap + theta K_0 - m - s equal to
/// zero, R0 = 1 / theta*. Returns 0 when K_0 vanishes.
double r0_by_threshold(const ModelParams& params, const Discretization& grid, const EigenOptions& options = {});

/// Root of lambda_hat_0(k) = k by bisection. The root lies in [0, lambda_hat_0(0)] when
/// lambda_hat_0(0) >= 0 and in [lambda_hat_0(0), 0] otherwise. Absent on an infinite horizon
/// when lambda_hat_0(0) < 0. Throws NumericalError if the bracket fails.
std::optional<double> growth_bound(const ModelParams& params, const Discretization& grid, double root_tol = 1e-9,
                                   const EigenOptions& options = {});

/// phi_age(x, a_j) = chi(x,0) e(x) S_j(x,0) exp(-lambda0 a_j) phi(x).
AgeField eigenfunction_pair(const ModelParams& params, const Discretization& grid, double lambda0,
                            const SpatialField& phi);

struct SpectralOptions {
    EigenOptions eigen;
    double root_tol = 1e-9;
    /// values of k at which lambda_hat_0 is sampled for the report
    std::vector<double> k_samples;
};

struct SpectralReport {
    double r0                = 0.0;
    double r0_threshold      = 0.0; // second route
    double lambda_hat_0      = 0.0;
    std::optional<double> s_L0;
    /// Eigenfunction at k = s_L0, or at k = 0 when the growth bound is absent.
    SpatialField phi;
    /// Paired age component; empty when the growth bound is absent.
    AgeField phi_age;
    std::size_t iterations = 0;
    double residual        = 0.0;
    std::vector<std::pair<double, double>> lambda_samples;
    /// sign(r0 - 1) == sign(lambda_hat_0), both with the 1e-8 dead band
    bool sign_consistent = true;
};

SpectralReport spectral_report(const ModelParams& params, const Discretization& grid,
                               const SpectralOptions& options = {});

/// -1, 0 or 1 with |value| < band treated as zero.
int banded_sign(double value, double band = 1e-8);

/// key: value lines.
std::string format_report(const SpectralReport& report);

} // namespace hybridpop
