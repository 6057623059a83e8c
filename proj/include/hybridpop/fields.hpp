#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace hybridpop
{

/// One value per spatial node.
class SpatialField
{
public:
    SpatialField() = default;
    explicit SpatialField(std::size_t n, double value = 0.0)
        : values_(n, value)
    {
    }
    explicit SpatialField(std::vector<double> values)
        : values_(std::move(values))
    {
    }

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    auto begin() { return values_.begin(); }
    auto end() { return values_.end(); }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    std::span<double> span() { return values_; }
    std::span<const double> span() const { return values_; }
    const std::vector<double>& values() const { return values_; }

    double max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }
    double min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }

    bool operator==(const SpatialField&) const = default;

private:
    std::vector<double> values_;
};

/// Row-major n_x by n_ages matrix; row i holds the age profile at spatial node i.
class AgeField
{
public:
    AgeField() = default;
    AgeField(std::size_t n_x, std::size_t n_ages, double value = 0.0)
        : n_x_(n_x)
        , n_ages_(n_ages)
        , data_(n_x * n_ages, value)
    {
    }

    std::size_t n_x() const { return n_x_; }
    std::size_t n_ages() const { return n_ages_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ages_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ages_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * n_ages_, n_ages_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_ages_, n_ages_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    bool operator==(const AgeField&) const = default;

private:
    std::size_t n_x_ = 0;
    std::size_t n_ages_ = 0;
    std::vector<double> data_;
};

} // namespace hybridpop
