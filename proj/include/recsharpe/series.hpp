#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "recsharpe/errors.hpp"

namespace recsharpe {

// Ordered per-period returns. Always non-empty and finite.
class ReturnSeries {
public:
    explicit ReturnSeries(std::vector<double> values, std::string symbol = {},
                          std::vector<std::string> timestamps = {});

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::string& symbol() const noexcept { return symbol_; }
    const std::vector<std::string>& timestamps() const noexcept { return timestamps_; }

    ReturnSeries negated() const;
    ReturnSeries scaled(double factor) const;

private:
    std::vector<double> values_;
    std::string symbol_;
    std::vector<std::string> timestamps_;
};

// Cumulative levels S_0 = 0, S_k = S_{k-1} + r_k.
class PricePath {
public:
    static PricePath from_returns(std::span<const double> returns);

    std::span<const double> levels() const noexcept { return levels_; }
    // Number of steps n; levels().size() == n + 1.
    std::size_t steps() const noexcept { return levels_.size() - 1; }

private:
    explicit PricePath(std::vector<double> levels) : levels_(std::move(levels)) {}
    std::vector<double> levels_;
};

} // namespace recsharpe
