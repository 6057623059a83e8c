#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hybridpop
{

/// Square tridiagonal matrix. lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n)
        : lower(n, 0.0)
        , diag(n, 0.0)
        , upper(n, 0.0)
    {
    }

    std::size_t size() const { return diag.size(); }

    void apply(std::span<const double> x, std::span<double> y) const;

    /// Thomas algorithm without pivoting; intended for (possibly near-singular) M-matrices.
    /// Throws NumericalError on a zero pivot.
    void solve(std::span<const double> rhs, std::span<double> x) const;

    /// Infinity norm (max absolute row sum).
    double norm_inf() const;

    Tridiagonal scaled(double factor) const;
    Tridiagonal& add_diagonal(std::span<const double> values);
    Tridiagonal& add_diagonal(double value);
};

} // namespace hybridpop
