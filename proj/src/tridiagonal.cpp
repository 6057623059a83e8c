#include "hybridpop/tridiagonal.hpp"
#include "hybridpop/error.hpp"

#include <cmath>
#include <vector>

namespace hybridpop
{

void Tridiagonal::apply(std::span<const double> x, std::span<double> y) const
{
    const std::size_t n = size();
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + upper[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        y[i] = lower[i] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
    }
    y[n - 1] = lower[n - 1] * x[n - 2] + diag[n - 1] * x[n - 1];
}

void Tridiagonal::solve(std::span<const double> rhs, std::span<double> x) const
{
    const std::size_t n = size();
    std::vector<double> c(n);
    std::vector<double> d(n);
    double pivot = diag[0];
    if (pivot == 0.0) {
        throw NumericalError("tridiagonal solve: zero pivot");
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0) {
            throw NumericalError("tridiagonal solve: zero pivot");
        }
        c[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = d[i] - c[i] * x[i + 1];
    }
}

double Tridiagonal::norm_inf() const
{
    double best = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double row = std::abs(diag[i]);
        if (i > 0) {
            row += std::abs(lower[i]);
        }
        if (i + 1 < size()) {
            row += std::abs(upper[i]);
        }
        best = std::max(best, row);
    }
    return best;
}

Tridiagonal Tridiagonal::scaled(double factor) const
{
    Tridiagonal t = *this;
    for (std::size_t i = 0; i < size(); ++i) {
        t.lower[i] *= factor;
        t.diag[i] *= factor;
        t.upper[i] *= factor;
    }
    return t;
}

Tridiagonal& Tridiagonal::add_diagonal(std::span<const double> values)
{
    for (std::size_t i = 0; i < size(); ++i) {
        diag[i] += values[i];
    }
    return *this;
}

Tridiagonal& Tridiagonal::add_diagonal(double value)
{
    for (double& v : diag) {
        v += value;
    }
    return *this;
}

} // namespace hybridpop
