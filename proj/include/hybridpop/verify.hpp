#pragma once

#include "hybridpop/equilibrium.hpp"
#include "hybridpop/grid.hpp"
#include "hybridpop/rates.hpp"
#include "hybridpop/solver.hpp"
#include "hybridpop/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hybridpop
{

/// Upper state (M1, M2 exp(-mu_lower a)) and lower state epsilon (phi, phi_age).
struct SuperSubPair {
    PopulationState upper;
    PopulationState lower;
    double M1      = 0.0;
    double M2      = 0.0;
    double epsilon = 0.0;
    std::size_t halvings = 0;
    double lambda0       = 0.0; // growth bound the eigenpair belongs to
};

struct VerdictReport {
    std::string name;
    bool passed  = false;
    bool skipped = false;
    std::string skip_reason;
    double measured  = 0.0;
    double expected  = 0.0;
    double tolerance = 0.0;
    std::string notes;
    /// Secondary measurements, in a fixed order per check.
    std::vector<std::pair<std::string, double>> details;
};

/// M1 = max(chi e, beta chi e / (mu c), floor), M2 = chi e M1, doubled until
/// M2 beta / mu <= c M1^2 and chi e M1 <= M2. epsilon is halved from 1 until, at every node,
///   lambda0 phi + (beta(P_eps) - beta(0)) int beta_age phi_age - c eps phi^2 >= 0,
///   lambda0 + mu(a, 0) - mu(a, P_eps) >= 0 at the survival midpoints,
///   chi(P_eps) >= chi(0),
/// with P_eps the quadrature of eps phi_age.
/// Throws std::invalid_argument when the report carries no age eigenfunction or a
/// nonpositive growth bound; NumericalError if halving never succeeds.
SuperSubPair build_super_sub(const ModelParams& params, const Discretization& grid, const SpectralReport& report,
                             double floor = 0.0);

/// Decay rate of the linearization at zero: the growth bound when defined, otherwise the root of
/// lambda_hat_0(k) = k on (-mu_lower, 0), otherwise -mu_lower.
double extinction_rate(const ModelParams& params, const Discretization& grid);

struct ExtinctionOptions {
    double extinct_tol = 1e-3;
    /// Horizon is 50 / |lambda_hat_0(0)|, lengthened to 10 / |rate| for slow linear decay.
    std::optional<double> t_end;
    /// Replaces the default start u = 1, w = exp(-a).
    std::optional<PopulationState> initial;
};

/// From u = 1, w = exp(-a): passes iff max u + P at t_end is below extinct_tol times its initial value.
/// Throws std::invalid_argument unless R0 < 1 and A6 holds.
VerdictReport check_extinction(const ModelParams& params, const Discretization& grid,
                               const ExtinctionOptions& options = {});

struct PersistenceOptions {
    double monotone_tol    = 1e-10;
    double convergence_tol = 1e-3; // relative sup norm against the equilibrium module
    /// Default max(30, 30 / lambda0).
    std::optional<double> t_end;
    double floor = 0.0; // forwarded to build_super_sub
    /// Drops the bound w0 <= M exp(-mu_lower a) for the generic trajectory. Only allowed on an
    /// infinite horizon with A6 holding and chi density independent.
    bool relax_age_bound = false;
};

/// Sandwich run from build_super_sub plus one generic state between the two.
/// Passes iff the upper max u is nonincreasing and the lower nondecreasing per step, all three
/// final states lie within convergence_tol of the equilibrium (u and w, relative sup norm),
/// and the tail minimum of min u stays above half of the lower trajectory's final min u.
/// Throws std::invalid_argument unless R0 > 1, A4 and A7 hold.
VerdictReport check_persistence_and_convergence(const ModelParams& params, const Discretization& grid,
                                                const PersistenceOptions& options = {});

/// Tail (last quarter) maxima of max u and of the x-sup of the age integral of w against
/// N1 and N2 with 5% slack. measured is the larger of the two ratios.
VerdictReport check_bounds(const ModelParams& params, const Discretization& grid, const Trajectory& traj);

struct PropertyOptions {
    std::size_t n_steps = 500;
    double tolerance    = 1e-10;
};

/// Seeded ordered pair of low-frequency cosine mixtures, co-evolved step by step.
/// Throws std::invalid_argument unless A4 holds.
VerdictReport check_comparison(const ModelParams& params, const Discretization& grid, std::uint64_t seed,
                               const PropertyOptions& options = {});

/// Seeded nonnegative initial state; passes iff no entry drops below -tolerance.
VerdictReport check_positivity(const ModelParams& params, const Discretization& grid, std::uint64_t seed,
                               const PropertyOptions& options = {});

struct SuiteOptions {
    bool extinction  = true;
    bool persistence = true;
    bool bounds      = true;
    bool comparison  = true;
    bool positivity  = true;
    std::uint64_t seed = 1;
    double bounds_t_end = 40.0;
    ExtinctionOptions extinction_options;
    PersistenceOptions persistence_options;
    PropertyOptions property_options;
};

/// Runs the selected checks concurrently, one verdict per selected check in the fixed order
/// extinction, persistence, bounds, comparison, positivity. Unmet hypotheses give skipped
/// verdicts. Numerical failures inside a check propagate.
std::vector<VerdictReport> run_suite(const ModelParams& params, const Discretization& grid,
                                     const SuiteOptions& options = {});

/// true when nothing selected failed; skipped checks do not count as failures.
bool suite_passed(const std::vector<VerdictReport>& verdicts);

/// Fixed-width table, one row per verdict.
std::string format_table(const std::vector<VerdictReport>& verdicts);

} // namespace hybridpop
