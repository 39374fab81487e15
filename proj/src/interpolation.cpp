#include "recsharpe/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "recsharpe/errors.hpp"

namespace recsharpe {

std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> weights) {
    if (!weights.empty() && weights.size() != y.size()) throw InputError("weights and values differ in length");
    struct Block {
        double mean;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w > 0.0)) throw InputError("isotonic weights must be positive");
        blocks.push_back({y[i], w, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            const Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            const double total = a.weight + b.weight;
            a.mean = (a.mean * a.weight + b.mean * b.weight) / total;
            a.weight = total;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
    return out;
}

namespace {

double edge_slope(double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0.0)
        d = 0.0;
    else if (m0 * m1 <= 0.0 && std::abs(d) > std::abs(3.0 * m0))
        d = 3.0 * m0;
    return d;
}

} // namespace

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw InputError("interpolant knots and values differ in length");
    if (x_.size() < 2) throw InputError("interpolant needs at least two knots");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1])) throw InputError("interpolant knots must be strictly increasing");
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), m(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        m[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
        d_[0] = d_[1] = m[0];
        return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (m[k - 1] * m[k] <= 0.0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
    }
    d_[0] = edge_slope(h[0], h[1], m[0], m[1]);
    d_[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
}

std::size_t MonotoneCubic::segment(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const auto idx = static_cast<std::size_t>(std::distance(x_.begin(), it));
    return std::clamp<std::size_t>(idx, 1, x_.size() - 1) - 1;
}

double MonotoneCubic::value(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
           (t3 - t2) * h * d_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    return (6 * t2 - 6 * t) * y_[i] / h + (3 * t2 - 4 * t + 1) * d_[i] + (-6 * t2 + 6 * t) * y_[i + 1] / h +
           (3 * t2 - 2 * t) * d_[i + 1];
}

double MonotoneCubic::inverse(double y) const {
    if (y <= y_.front()) return x_.front();
    if (y >= y_.back()) return x_.back();
    const auto it = std::upper_bound(y_.begin(), y_.end(), y);
    const std::size_t i = static_cast<std::size_t>(std::distance(y_.begin(), it)) - 1;
    double lo = x_[i], hi = x_[i + 1];
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (value(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace recsharpe
