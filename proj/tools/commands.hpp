#pragma once

#include "config.hpp"

#include "hybridpop/grid.hpp"
#include "hybridpop/rates.hpp"
#include "hybridpop/solver.hpp"

#include <iosfwd>

namespace hybridpop::app
{

enum ExitCode : int { success = 0, config_error = 1, numerical_failure = 2, verify_failure = 3 };

/// Initial state from the config's u and w spellings:
///   u: constant(v) | cosine-bump(amplitude, modes) | equilibrium(file) | eigenfunction(scale)
///   w: constant(v) | exp-decay(rate) | exp-decay(amplitude, rate) | file(path) | eigenfunction(scale)
/// cosine-bump is amplitude (1 + cos(modes pi x / L)) / 2. Files are (x, u) and (x, a, w) CSVs,
/// relative paths taken from the config's directory.
PopulationState initial_state(const RunConfig& config, const ModelParams& params, const Discretization& grid);

/// Parses argv, runs one subcommand, and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hybridpop::app
