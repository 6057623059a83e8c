#pragma once

#include "hybridpop/fields.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hybridpop
{

inline constexpr double infinite_age = std::numeric_limits<double>::infinity();

// Resolution-independent descriptors. Each has a canonical textual spelling, see descriptors.hpp.

namespace spatial
{
struct Constant {
    double value;
};
struct CosineMode {
    double amplitude;
    int mode;
};
/// base + sum amplitude * cos(mode * pi * x / L)
struct Cosine {
    double base;
    std::vector<CosineMode> modes;
};
/// Piecewise linear through (x, value) breakpoints, flat outside.
struct Table {
    std::vector<double> x;
    std::vector<double> values;
};
} // namespace spatial
using SpatialProfile = std::variant<spatial::Constant, spatial::Cosine, spatial::Table>;

namespace age
{
struct Constant {
    double value;
};
/// initial * exp(-decay * a)
struct Exponential {
    double initial;
    double decay;
};
struct Table {
    std::vector<double> ages;
    std::vector<double> values;
};
} // namespace age
using AgeProfile = std::variant<age::Constant, age::Exponential, age::Table>;

namespace density
{
struct Constant {
};
/// 1 / (1 + P / half_saturation)
struct Saturating {
    double half_saturation;
};
/// exp(-rate * P)
struct Exponential {
    double rate;
};
/// max(0, 1 + slope * min(P, cap)); increasing for slope > 0.
struct LinearThreshold {
    double slope;
    double cap;
};
} // namespace density
using DensityResponse = std::variant<density::Constant, density::Saturating, density::Exponential, density::LinearThreshold>;

double evaluate(const SpatialProfile& profile, double x, double length);
double evaluate(const AgeProfile& profile, double a);
double evaluate(const DensityResponse& response, double P);

bool is_density_independent(const DensityResponse& response);

/// Separable rate law spatial(x) * age(a) * density(P), resolution independent.
struct RateLawSpec {
    SpatialProfile spatial = spatial::Constant{1.0};
    AgeProfile age         = age::Constant{1.0};
    DensityResponse density = density::Constant{};
};

/// A rate law with its spatial multiplier sampled on the nodes of a grid.
class RateLaw
{
public:
    RateLaw() = default;
    RateLaw(SpatialField spatial, AgeProfile age, DensityResponse density);

    double operator()(std::size_t x_index, double a, double P) const
    {
        return spatial_[x_index] * age_factor(a) * density_factor(P);
    }

    double age_factor(double a) const { return evaluate(age_, a); }
    double density_factor(double P) const { return evaluate(density_, P); }

    const SpatialField& spatial() const { return spatial_; }
    const AgeProfile& age() const { return age_; }
    const DensityResponse& density() const { return density_; }

    bool density_independent() const { return is_density_independent(density_); }

    /// Bounds over nodes, ages in [0, a_max) and P >= 0. Suprema are finite or construction fails.
    double supremum(double a_max) const;
    double infimum(double a_max) const;

private:
    SpatialField spatial_;
    AgeProfile age_;
    DensityResponse density_;
};

/// Everything needed to instantiate a model on any spatial resolution.
struct ModelSpec {
    double length    = 1.0;
    double diffusion = 1.0;
    SpatialProfile mortality  = spatial::Constant{1.0}; // m
    SpatialProfile settlement = spatial::Constant{1.0}; // e
    SpatialProfile competition = spatial::Constant{1.0}; // c
    RateLawSpec beta;
    RateLawSpec mu;
    RateLawSpec chi; // age component is ignored
    double a_max = infinite_age;
    std::optional<double> mu_lower;
    /// Replaces e in the resolvent (m + s - d Laplacian) of the next-generation operator.
    std::optional<SpatialProfile> resolvent_settlement;
};

struct ModelParams {
    double length    = 1.0;
    double diffusion = 1.0;
    SpatialField m;
    SpatialField e;
    SpatialField c;
    RateLaw beta;
    RateLaw mu;
    RateLaw chi;
    double a_max    = infinite_age;
    double mu_lower = 1.0;
    SpatialField resolvent_settlement;

    std::size_t n_x() const { return m.size(); }
    bool finite_horizon() const { return a_max < infinite_age; }
};

/// Samples the spec on n_x uniform nodes of [0, L] and validates the result.
/// Throws ConfigError on nonpositive d or L, negative coefficients, unbounded laws,
/// chi outside (0, 1], or an invalid mu_lower.
ModelParams instantiate(const ModelSpec& spec, std::size_t n_x);

double eval_beta(const ModelParams& params, std::size_t x_index, double a, double P);
double eval_mu(const ModelParams& params, std::size_t x_index, double a, double P);
double eval_chi(const ModelParams& params, std::size_t x_index, double P);

/// Long-run bounds N1 = beta_sup chi_sup e_sup / (c_inf mu_inf) on u and
/// N2 = beta_sup chi_sup^2 e_sup^2 / (c_inf mu_inf^2) on the age integral of w.
struct BoundConstants {
    double beta_sup;
    double chi_sup;
    double e_sup;
    double c_inf;
    double mu_inf;
    double n1;
    double n2;
};
BoundConstants bound_constants(const ModelParams& params);

} // namespace hybridpop
