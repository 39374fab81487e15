#pragma once

#include <span>
#include <vector>

namespace recsharpe {

// Weighted least-squares projection of y onto non-decreasing sequences
// (pool adjacent violators). Empty weights mean unit weights.
std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> weights = {});

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
// slopes with the Fritsch-Butland harmonic mean). Monotone data gives a
// monotone interpolant with no overshoot. Outside the knot range, value()
// holds the end value and derivative() is 0.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double derivative(double x) const;

    // x with value(x) == y for strictly increasing data, by bisection to
    // machine precision. y outside [y_front, y_back] is clamped to the ends.
    double inverse(double y) const;

    const std::vector<double>& knots() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return y_; }
    const std::vector<double>& slopes() const noexcept { return d_; }
    bool empty() const noexcept { return x_.empty(); }
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    double y_min() const { return y_.front(); }
    double y_max() const { return y_.back(); }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

} // namespace recsharpe
