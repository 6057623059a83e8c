#pragma once

#include <stdexcept>
#include <string>

namespace hybridpop
{

/// Malformed or inconsistent user input (config files, descriptors, grid requests).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A computation that failed to produce a trustworthy number: blow-up, stagnation,
/// tail-mass violation, bracket failure.
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace hybridpop
