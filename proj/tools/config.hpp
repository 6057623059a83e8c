#pragma once

#include "hybridpop/rates.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hybridpop::app
{

/// Every field has a default; a config file only needs the keys it changes.
struct RunConfig {
    ModelSpec model;

    // grid
    std::size_t n_x = 65;
    double dt       = 0.02;
    double tail_tol = 1e-8;

    // simulate
    double t_end = 10.0;
    std::vector<double> output_times; // empty: initial and final state
    std::string initial_u = "constant(1)";
    std::string initial_w = "exp-decay(1)";
    double blowup_threshold = 1e12;
    double negativity_tol   = 1e-12;

    // r0
    double k_min        = 0.0;
    double k_max        = 2.0;
    std::size_t k_count = 9;
    double eigen_tol    = 1e-10;
    double root_tol     = 1e-9;

    // equilibrium
    double fp_tol   = 1e-12;
    double fkpp_tol = 1e-11;

    // verify
    std::vector<std::string> suite = {"extinction", "persistence", "bounds", "comparison", "positivity"};
    std::uint64_t seed             = 1;
    double extinct_tol             = 1e-3;
    double monotone_tol            = 1e-10;
    double convergence_tol         = 1e-3;
    double property_tol            = 1e-10;
    std::size_t property_steps     = 500;
    double bounds_t_end            = 40.0;
    bool relax_age_bound           = false;

    // audit
    std::size_t probe_n_x = 33;
    std::size_t probe_n_a = 33;
    std::size_t probe_n_P = 17;
    std::optional<double> P_probe_max;

    // output
    std::filesystem::path directory = ".";
    bool plot = false;

    /// Directory relative file references are resolved against.
    std::filesystem::path base_directory = ".";
};

/// Reads a YAML config. Unknown keys, malformed values and bad descriptors throw ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_directory = ".");

/// One `key = value` line per resolved field in a fixed order, descriptors in canonical spelling.
/// Output location and plot flag are excluded so they do not change the hash.
std::string canonical_text(const RunConfig& config);

std::uint64_t fnv1a64(const std::string& bytes);

/// 16 lowercase hex digits of fnv1a64(canonical_text(config)).
std::string config_hash(const RunConfig& config);

} // namespace hybridpop::app
