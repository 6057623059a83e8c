#include "hybridpop/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace hybridpop::kernels
{
namespace
{

// Row bodies shared by both variants so the arithmetic is identical.

inline double row_weighted_sum(std::span<const double> row, std::span<const double> weights)
{
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        s += weights[j] * row[j];
    }
    return s;
}

inline void row_factors(double row_rate, std::span<const double> age_rates, std::span<double> out)
{
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = std::exp(-row_rate * age_rates[j]);
    }
}

inline double row_advance(std::span<double> row, std::span<const double> factors, double renewal)
{
    const std::size_t last = row.size() - 1;
    double exiting         = row[last];
    for (std::size_t j = last; j > 0; --j) {
        row[j] = row[j - 1] * factors[j - 1];
    }
    row[0] = renewal;
    return exiting;
}

inline double row_loss(std::span<const double> row, std::span<const double> factors)
{
    const std::size_t last = row.size() - 1;
    double s               = 0.0;
    for (std::size_t j = 0; j < last; ++j) {
        s += row[j] * (1.0 - factors[j]);
    }
    return s + row[last];
}

inline double row_survival_sum(double row_rate, std::span<const double> age_rates, std::span<const double> coeffs)
{
    double survival = 1.0;
    double s        = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        s += coeffs[j] * survival;
        survival *= std::exp(-row_rate * age_rates[j]);
    }
    return s;
}

} // namespace

namespace serial
{
void weighted_age_sums(const AgeField& w, std::span<const double> weights, std::span<double> out)
{
    for (std::size_t i = 0; i < w.n_x(); ++i) {
        out[i] = row_weighted_sum(w.row(i), weights);
    }
}

void survival_factors(std::span<const double> row_rates, std::span<const double> age_rates, AgeField& factors)
{
    for (std::size_t i = 0; i < factors.n_x(); ++i) {
        row_factors(row_rates[i], age_rates, factors.row(i));
    }
}

void advance_ages(AgeField& w, const AgeField& factors, std::span<const double> renewal, std::span<double> exiting)
{
    for (std::size_t i = 0; i < w.n_x(); ++i) {
        exiting[i] = row_advance(w.row(i), factors.row(i), renewal[i]);
    }
}

void loss_sums(const AgeField& w, const AgeField& factors, std::span<double> out)
{
    for (std::size_t i = 0; i < w.n_x(); ++i) {
        out[i] = row_loss(w.row(i), factors.row(i));
    }
}

void survival_weighted_sums(std::span<const double> row_rates, std::span<const double> age_rates,
                            std::span<const double> coeffs, std::span<double> out)
{
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = row_survival_sum(row_rates[i], age_rates, coeffs);
    }
}
} // namespace serial

namespace parallel
{
void weighted_age_sums(const AgeField& w, std::span<const double> weights, std::span<double> out)
{
    const auto n = static_cast<std::ptrdiff_t>(w.n_x());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = row_weighted_sum(w.row(i), weights);
    }
}

void survival_factors(std::span<const double> row_rates, std::span<const double> age_rates, AgeField& factors)
{
    const auto n = static_cast<std::ptrdiff_t>(factors.n_x());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        row_factors(row_rates[i], age_rates, factors.row(i));
    }
}

void advance_ages(AgeField& w, const AgeField& factors, std::span<const double> renewal, std::span<double> exiting)
{
    const auto n = static_cast<std::ptrdiff_t>(w.n_x());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        exiting[i] = row_advance(w.row(i), factors.row(i), renewal[i]);
    }
}

void loss_sums(const AgeField& w, const AgeField& factors, std::span<double> out)
{
    const auto n = static_cast<std::ptrdiff_t>(w.n_x());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = row_loss(w.row(i), factors.row(i));
    }
}

void survival_weighted_sums(std::span<const double> row_rates, std::span<const double> age_rates,
                            std::span<const double> coeffs, std::span<double> out)
{
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = row_survival_sum(row_rates[i], age_rates, coeffs);
    }
}
} // namespace parallel

} // namespace hybridpop::kernels
