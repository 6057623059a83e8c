#pragma once

// Data-parallel inner loops over the (space x age) lattice.
//
// Every kernel exists twice: a serial reference in `kernels::serial` and an OpenMP
// version in `kernels::parallel`. Parallelism is over spatial rows only and each row is
// reduced in the same order in both versions, so the two produce bitwise-identical
// results for any thread count.

#include "hybridpop/fields.hpp"

#include <span>

namespace hybridpop::kernels
{

enum class Policy { serial, parallel };

namespace serial
{
/// out[i] = sum_j weights[j] * w(i, j)
void weighted_age_sums(const AgeField& w, std::span<const double> weights, std::span<double> out);

/// factors(i, j) = exp(-row_rates[i] * age_rates[j])
void survival_factors(std::span<const double> row_rates, std::span<const double> age_rates, AgeField& factors);

/// Shifts every row one age node up with survival: w(i, j+1) <- w(i, j) * factors(i, j),
/// then w(i, 0) <- renewal[i]. exiting[i] receives the discarded content of the last node.
void advance_ages(AgeField& w, const AgeField& factors, std::span<const double> renewal, std::span<double> exiting);

/// out[i] = sum_{j < last} w(i, j) * (1 - factors(i, j)) + w(i, last): deaths on the lattice plus
/// the content about to leave it.
void loss_sums(const AgeField& w, const AgeField& factors, std::span<double> out);

/// out[i] = sum_j coeffs[j] * S(i, j) with S(i, 0) = 1 and S(i, j+1) = S(i, j) * exp(-row_rates[i] * age_rates[j]).
void survival_weighted_sums(std::span<const double> row_rates, std::span<const double> age_rates,
                            std::span<const double> coeffs, std::span<double> out);
} // namespace serial

namespace parallel
{
void weighted_age_sums(const AgeField& w, std::span<const double> weights, std::span<double> out);
void survival_factors(std::span<const double> row_rates, std::span<const double> age_rates, AgeField& factors);
void advance_ages(AgeField& w, const AgeField& factors, std::span<const double> renewal, std::span<double> exiting);
void loss_sums(const AgeField& w, const AgeField& factors, std::span<double> out);
void survival_weighted_sums(std::span<const double> row_rates, std::span<const double> age_rates,
                            std::span<const double> coeffs, std::span<double> out);
} // namespace parallel

inline void weighted_age_sums(Policy p, const AgeField& w, std::span<const double> weights, std::span<double> out)
{
    p == Policy::parallel ? parallel::weighted_age_sums(w, weights, out) : serial::weighted_age_sums(w, weights, out);
}

inline void survival_factors(Policy p, std::span<const double> row_rates, std::span<const double> age_rates,
                             AgeField& factors)
{
    p == Policy::parallel ? parallel::survival_factors(row_rates, age_rates, factors)
                          : serial::survival_factors(row_rates, age_rates, factors);
}

inline void advance_ages(Policy p, AgeField& w, const AgeField& factors, std::span<const double> renewal,
                         std::span<double> exiting)
{
    p == Policy::parallel ? parallel::advance_ages(w, factors, renewal, exiting)
                          : serial::advance_ages(w, factors, renewal, exiting);
}

inline void loss_sums(Policy p, const AgeField& w, const AgeField& factors, std::span<double> out)
{
    p == Policy::parallel ? parallel::loss_sums(w, factors, out) : serial::loss_sums(w, factors, out);
}

inline void survival_weighted_sums(Policy p, std::span<const double> row_rates, std::span<const double> age_rates,
                                   std::span<const double> coeffs, std::span<double> out)
{
    p == Policy::parallel ? parallel::survival_weighted_sums(row_rates, age_rates, coeffs, out)
                          : serial::survival_weighted_sums(row_rates, age_rates, coeffs, out);
}

} // namespace hybridpop::kernels
