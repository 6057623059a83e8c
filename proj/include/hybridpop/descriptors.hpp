#pragma once

#include "hybridpop/rates.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hybridpop
{

/// `name` or `name(arg, arg, ...)`, whitespace ignored around tokens.
struct Call {
    std::string name;
    std::vector<std::string> args;
};

/// Throws ConfigError on unbalanced or trailing text.
Call parse_call(std::string_view text);

/// Full-string floating point parse; accepts inf. Throws ConfigError naming `what`.
double parse_number(std::string_view text, std::string_view what);

// Canonical spellings:
//   spatial  constant(v) | cosine(base, amplitude@mode, ...) | table(x=v, ...) | a bare number
//   age      constant(v) | exponential(v0, decay) | table(a=v, ...) | a bare number
//   density  constant | saturating(K) | exponential(r) | linear-threshold(r, cap)
SpatialProfile parse_spatial(std::string_view text);
AgeProfile parse_age(std::string_view text);
DensityResponse parse_density(std::string_view text);

std::string format(const SpatialProfile& profile);
std::string format(const AgeProfile& profile);
std::string format(const DensityResponse& response);

} // namespace hybridpop
