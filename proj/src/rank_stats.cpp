#include "recsharpe/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "recsharpe/errors.hpp"

namespace recsharpe {

namespace {

void require_same_size(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("rank statistics need equal-length inputs");
}

std::vector<std::size_t> order_by(std::span<const double> values, bool descending) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return descending ? values[a] > values[b] : values[a] < values[b];
    });
    return idx;
}

} // namespace

std::vector<std::size_t> descending_ranks(std::span<const double> values) {
    const auto order = order_by(values, true);
    std::vector<std::size_t> ranks(values.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
    return ranks;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const auto order = order_by(values, false);
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    require_same_size(x, y);
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean, dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    require_same_size(x, y);
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    // O(n^2) is fine for cross-sections of a few thousand assets.
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                ++ties_x;
                ++ties_y;
            } else if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom = std::sqrt((pairs - static_cast<double>(ties_x)) * (pairs - static_cast<double>(ties_y)));
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

double symmetric_blest(std::span<const double> x, std::span<const double> y) {
    require_same_size(x, y);
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    // Ascending ordinal ranks; this closed form equals the mean of Blest's
    // measure and its dual.
    const auto ascending = [](std::span<const double> v) {
        const auto order = order_by(v, false);
        std::vector<std::size_t> r(v.size());
        for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = i + 1;
        return r;
    };
    const auto rx = ascending(x), ry = ascending(y);
    const double nn = static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = static_cast<double>(rx[i]), q = static_cast<double>(ry[i]);
        s += r * q * (4.0 - (r + q) / (nn + 1.0));
    }
    const double xi = -(4.0 * nn + 5.0) / (nn - 1.0) + 6.0 / (nn * (nn * nn - 1.0)) * s;
    return std::clamp(xi, -1.0, 1.0);
}

std::vector<std::size_t> top_k(std::span<const double> values, std::size_t k) {
    auto order = order_by(values, true);
    order.resize(std::min(k, order.size()));
    return order;
}

std::vector<std::size_t> bottom_k(std::span<const double> values, std::size_t k) {
    auto order = order_by(values, false);
    order.resize(std::min(k, order.size()));
    return order;
}

double overlap_fraction(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw InputError("overlap needs sets of equal size");
    if (a.empty()) throw InputError("overlap of empty sets is undefined");
    std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<std::size_t> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(a.size());
}

} // namespace recsharpe
