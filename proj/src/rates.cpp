#include "hybridpop/rates.hpp"
#include "hybridpop/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybridpop
{
namespace
{

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x)
{
    if (x <= xs.front()) {
        return ys.front();
    }
    if (x >= xs.back()) {
        return ys.back();
    }
    auto hi        = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k  = static_cast<std::size_t>(hi - xs.begin());
    double theta   = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + theta * (ys[k] - ys[k - 1]);
}

void check_table(const std::vector<double>& xs, const std::vector<double>& ys, const char* what)
{
    if (xs.empty() || xs.size() != ys.size()) {
        throw ConfigError(std::string(what) + " table needs matching, nonempty breakpoint and value lists");
    }
    for (std::size_t k = 1; k < xs.size(); ++k) {
        if (!(xs[k] > xs[k - 1])) {
            throw ConfigError(std::string(what) + " table breakpoints must be strictly increasing");
        }
    }
}

double age_sup(const AgeProfile& profile, double a_max)
{
    return std::visit(overloaded{[](const age::Constant& p) { return p.value; },
                                 [&](const age::Exponential& p) {
                                     if (p.decay >= 0.0) {
                                         return p.initial;
                                     }
                                     return p.initial * std::exp(-p.decay * a_max);
                                 },
                                 [](const age::Table& p) { return *std::max_element(p.values.begin(), p.values.end()); }},
                      profile);
}

double age_inf(const AgeProfile& profile, double a_max)
{
    return std::visit(overloaded{[](const age::Constant& p) { return p.value; },
                                 [&](const age::Exponential& p) {
                                     if (p.decay <= 0.0) {
                                         return p.initial;
                                     }
                                     return p.initial * std::exp(-p.decay * a_max);
                                 },
                                 [](const age::Table& p) { return *std::min_element(p.values.begin(), p.values.end()); }},
                      profile);
}

double density_sup(const DensityResponse& response)
{
    return std::visit(overloaded{[](const density::Constant&) { return 1.0; },
                                 [](const density::Saturating&) { return 1.0; },
                                 [](const density::Exponential& r) {
                                     return r.rate >= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
                                 },
                                 [](const density::LinearThreshold& r) {
                                     return std::max(1.0, std::max(0.0, 1.0 + r.slope * r.cap));
                                 }},
                      response);
}

double density_inf(const DensityResponse& response)
{
    return std::visit(overloaded{[](const density::Constant&) { return 1.0; },
                                 [](const density::Saturating&) { return 0.0; },
                                 [](const density::Exponential& r) { return r.rate > 0.0 ? 0.0 : 1.0; },
                                 [](const density::LinearThreshold& r) {
                                     return std::max(0.0, std::min(1.0, 1.0 + r.slope * r.cap));
                                 }},
                      response);
}

void validate_response(const DensityResponse& response, const char* what)
{
    std::visit(overloaded{[](const density::Constant&) {},
                          [&](const density::Saturating& r) {
                              if (!(r.half_saturation > 0.0)) {
                                  throw ConfigError(std::string(what) + ": saturating constant must be positive");
                              }
                          },
                          [&](const density::Exponential& r) {
                              if (r.rate < 0.0) {
                                  throw ConfigError(std::string(what) + ": exponential response rate must be >= 0");
                              }
                          },
                          [&](const density::LinearThreshold& r) {
                              if (!(r.cap >= 0.0) || !std::isfinite(r.cap)) {
                                  throw ConfigError(std::string(what) + ": linear-threshold cap must be finite and >= 0");
                              }
                          }},
               response);
}

void validate_age(const AgeProfile& profile, double a_max, const char* what)
{
    std::visit(overloaded{[&](const age::Constant& p) {
                              if (p.value < 0.0) {
                                  throw ConfigError(std::string(what) + ": age profile must be nonnegative");
                              }
                          },
                          [&](const age::Exponential& p) {
                              if (p.initial < 0.0) {
                                  throw ConfigError(std::string(what) + ": age profile must be nonnegative");
                              }
                              if (p.decay < 0.0 && !(a_max < infinite_age)) {
                                  throw ConfigError(std::string(what) + ": growing exponential is unbounded on an infinite horizon");
                              }
                          },
                          [&](const age::Table& p) {
                              check_table(p.ages, p.values, what);
                              for (double v : p.values) {
                                  if (v < 0.0) {
                                      throw ConfigError(std::string(what) + ": age profile must be nonnegative");
                                  }
                              }
                          }},
               profile);
}

SpatialField sample(const SpatialProfile& profile, std::size_t n_x, double length, const char* what)
{
    if (const auto* table = std::get_if<spatial::Table>(&profile)) {
        check_table(table->x, table->values, what);
    }
    SpatialField field(n_x);
    for (std::size_t i = 0; i < n_x; ++i) {
        double x = length * static_cast<double>(i) / static_cast<double>(n_x - 1);
        field[i] = evaluate(profile, x, length);
        if (!std::isfinite(field[i])) {
            throw ConfigError(std::string(what) + ": nonfinite value at node " + std::to_string(i));
        }
        if (field[i] < 0.0) {
            throw ConfigError(std::string(what) + ": negative value at node " + std::to_string(i));
        }
    }
    return field;
}

} // namespace

double evaluate(const SpatialProfile& profile, double x, double length)
{
    return std::visit(overloaded{[](const spatial::Constant& p) { return p.value; },
                                 [&](const spatial::Cosine& p) {
                                     double v = p.base;
                                     for (const auto& m : p.modes) {
                                         v += m.amplitude * std::cos(m.mode * std::numbers::pi * x / length);
                                     }
                                     return v;
                                 },
                                 [&](const spatial::Table& p) { return interpolate(p.x, p.values, x); }},
                      profile);
}

double evaluate(const AgeProfile& profile, double a)
{
    return std::visit(overloaded{[](const age::Constant& p) { return p.value; },
                                 [&](const age::Exponential& p) { return p.initial * std::exp(-p.decay * a); },
                                 [&](const age::Table& p) { return interpolate(p.ages, p.values, a); }},
                      profile);
}

double evaluate(const DensityResponse& response, double P)
{
    return std::visit(overloaded{[](const density::Constant&) { return 1.0; },
                                 [&](const density::Saturating& r) { return 1.0 / (1.0 + P / r.half_saturation); },
                                 [&](const density::Exponential& r) { return std::exp(-r.rate * P); },
                                 [&](const density::LinearThreshold& r) {
                                     return std::max(0.0, 1.0 + r.slope * std::min(P, r.cap));
                                 }},
                      response);
}

bool is_density_independent(const DensityResponse& response)
{
    return std::visit(overloaded{[](const density::Constant&) { return true; },
                                 [](const density::Saturating&) { return false; },
                                 [](const density::Exponential& r) { return r.rate == 0.0; },
                                 [](const density::LinearThreshold& r) { return r.slope == 0.0 || r.cap == 0.0; }},
                      response);
}

RateLaw::RateLaw(SpatialField spatial, AgeProfile age, DensityResponse density)
    : spatial_(std::move(spatial))
    , age_(std::move(age))
    , density_(std::move(density))
{
}

double RateLaw::supremum(double a_max) const
{
    return spatial_.max() * age_sup(age_, a_max) * density_sup(density_);
}

double RateLaw::infimum(double a_max) const
{
    return spatial_.min() * age_inf(age_, a_max) * density_inf(density_);
}

ModelParams instantiate(const ModelSpec& spec, std::size_t n_x)
{
    if (n_x < 3) {
        throw ConfigError("at least 3 spatial nodes are required");
    }
    if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
        throw ConfigError("domain length must be positive and finite");
    }
    if (!(spec.diffusion > 0.0) || !std::isfinite(spec.diffusion)) {
        throw ConfigError("diffusion coefficient must be positive and finite");
    }
    if (!(spec.a_max > 0.0)) {
        throw ConfigError("a_max must be positive (or inf)");
    }
    validate_age(spec.beta.age, spec.a_max, "beta");
    validate_age(spec.mu.age, spec.a_max, "mu");
    validate_response(spec.beta.density, "beta");
    validate_response(spec.mu.density, "mu");
    validate_response(spec.chi.density, "chi");

    ModelParams p;
    p.length    = spec.length;
    p.diffusion = spec.diffusion;
    p.a_max     = spec.a_max;
    p.m         = sample(spec.mortality, n_x, spec.length, "m");
    p.e         = sample(spec.settlement, n_x, spec.length, "e");
    p.c         = sample(spec.competition, n_x, spec.length, "c");
    p.beta = RateLaw(sample(spec.beta.spatial, n_x, spec.length, "beta"), spec.beta.age, spec.beta.density);
    p.mu   = RateLaw(sample(spec.mu.spatial, n_x, spec.length, "mu"), spec.mu.age, spec.mu.density);
    p.chi  = RateLaw(sample(spec.chi.spatial, n_x, spec.length, "chi"), age::Constant{1.0}, spec.chi.density);
    p.resolvent_settlement =
        spec.resolvent_settlement ? sample(*spec.resolvent_settlement, n_x, spec.length, "resolvent settlement") : p.e;

    if (!std::isfinite(p.beta.supremum(p.a_max)) || !std::isfinite(p.mu.supremum(p.a_max))) {
        throw ConfigError("beta and mu must be bounded");
    }
    if (p.chi.supremum(p.a_max) > 1.0 + 1e-15) {
        throw ConfigError("chi must not exceed 1");
    }
    for (std::size_t i = 0; i < n_x; ++i) {
        if (!(p.chi(i, 0.0, 0.0) > 0.0)) {
            throw ConfigError("chi must be positive at P = 0 (node " + std::to_string(i) + ")");
        }
    }

    double mu_inf = p.mu.infimum(p.a_max);
    if (spec.mu_lower) {
        if (!(*spec.mu_lower > 0.0)) {
            throw ConfigError("mu_lower must be positive");
        }
        if (*spec.mu_lower > mu_inf * (1.0 + 1e-12)) {
            throw ConfigError("mu_lower exceeds the infimum of mu");
        }
        p.mu_lower = *spec.mu_lower;
    }
    else {
        if (!(mu_inf > 0.0)) {
            throw ConfigError("the infimum of mu must be positive");
        }
        p.mu_lower = mu_inf;
    }
    return p;
}

namespace
{
void check_args(const ModelParams& params, std::size_t x_index, double a, double P)
{
    if (x_index >= params.n_x()) {
        throw std::out_of_range("spatial index out of range");
    }
    if (!(a >= 0.0) || !(a < params.a_max)) {
        throw std::out_of_range("age outside [0, a_max)");
    }
    if (!(P >= 0.0)) {
        throw std::invalid_argument("total population must be nonnegative");
    }
}
} // namespace

double eval_beta(const ModelParams& params, std::size_t x_index, double a, double P)
{
    check_args(params, x_index, a, P);
    return params.beta(x_index, a, P);
}

double eval_mu(const ModelParams& params, std::size_t x_index, double a, double P)
{
    check_args(params, x_index, a, P);
    return params.mu(x_index, a, P);
}

double eval_chi(const ModelParams& params, std::size_t x_index, double P)
{
    check_args(params, x_index, 0.0, P);
    return params.chi(x_index, 0.0, P);
}

BoundConstants bound_constants(const ModelParams& params)
{
    BoundConstants b{};
    b.beta_sup = params.beta.supremum(params.a_max);
    b.chi_sup  = params.chi.supremum(params.a_max);
    b.e_sup    = params.e.max();
    b.c_inf    = params.c.min();
    b.mu_inf   = params.mu_lower;
    if (b.beta_sup == 0.0) {
        b.n1 = 0.0;
        b.n2 = 0.0;
        return b;
    }
    b.n1 = b.beta_sup * b.chi_sup * b.e_sup / (b.c_inf * b.mu_inf);
    b.n2 = b.beta_sup * b.chi_sup * b.chi_sup * b.e_sup * b.e_sup / (b.c_inf * b.mu_inf * b.mu_inf);
    return b;
}

} // namespace hybridpop
