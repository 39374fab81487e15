#include "recsharpe/records.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "recsharpe/seeding.hpp"

namespace recsharpe {

namespace {

RecordSummary summarize(std::size_t r_plus, std::size_t r_minus, std::size_t n) {
    RecordSummary s;
    s.r_plus = r_plus;
    s.r_minus = r_minus;
    s.n = n;
    s.t_minus = n - (r_plus - 1);
    s.t_plus = n - (r_minus - 1);
    return s;
}

} // namespace

RecordSummary count_records(const PricePath& path) {
    const auto levels = path.levels();
    const std::size_t n = path.steps();
    if (n == 0) throw InputError("price path has no steps");
    double hi = levels[0], lo = levels[0];
    std::size_t up = 1, down = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        const double s = levels[k];
        if (s > hi) {
            hi = s;
            ++up;
        }
        if (s < lo) {
            lo = s;
            ++down;
        }
    }
    return summarize(up, down, n);
}

RecordSummary count_records(std::span<const double> returns) {
    if (returns.empty()) throw InputError("return series is empty");
    std::uint32_t plus = 0, minus = 0;
    std::vector<std::uint32_t> p(returns.size()), m(returns.size());
    prefix_record_counts(returns, p, m);
    plus = p.back();
    minus = m.back();
    return summarize(plus, minus, returns.size());
}

long record_difference(std::span<const double> returns, double drift) noexcept {
    double s = 0.0, hi = 0.0, lo = 0.0;
    long diff = 0;
    for (const double r : returns) {
        s += r + drift;
        const bool up = s > hi;
        const bool down = s < lo;
        hi = up ? s : hi;
        lo = down ? s : lo;
        diff += static_cast<long>(up) - static_cast<long>(down);
    }
    return diff;
}

namespace {

// Eight drifts per vector register; B registers per pass for instruction-level
// parallelism. Lane arithmetic is the scalar recurrence of record_difference.
typedef double Lanes __attribute__((vector_size(64)));
constexpr std::size_t kLanes = 8;

template <std::size_t B>
void record_difference_lanes(std::span<const double> increments, const double* drifts,
                             std::size_t width, double* out) noexcept {
    Lanes d[B]{}, s[B]{}, hi[B]{}, lo[B]{}, diff[B]{};
    for (std::size_t j = 0; j < width; ++j) d[j / kLanes][j % kLanes] = drifts[j];
    for (const double r : increments) {
        for (std::size_t b = 0; b < B; ++b) {
            s[b] += r + d[b];
            const auto up = s[b] > hi[b];
            const auto down = s[b] < lo[b];
            hi[b] = up ? s[b] : hi[b];
            lo[b] = down ? s[b] : lo[b];
            // Comparison masks are -1 / 0.
            diff[b] += __builtin_convertvector(down, Lanes) - __builtin_convertvector(up, Lanes);
        }
    }
    for (std::size_t j = 0; j < width; ++j) out[j] += diff[j / kLanes][j % kLanes];
}

} // namespace

void accumulate_record_differences(std::span<const double> increments,
                                   std::span<const double> drifts,
                                   std::span<double> out) noexcept {
    constexpr std::size_t kPass = 4 * kLanes;
    for (std::size_t base = 0; base < drifts.size(); base += kPass) {
        const std::size_t width = std::min(kPass, drifts.size() - base);
        const double* d = drifts.data() + base;
        double* o = out.data() + base;
        if (width <= kLanes)
            record_difference_lanes<1>(increments, d, width, o);
        else if (width <= 2 * kLanes)
            record_difference_lanes<2>(increments, d, width, o);
        else
            record_difference_lanes<4>(increments, d, width, o);
    }
}

void prefix_record_counts(std::span<const double> returns, std::span<std::uint32_t> out_plus,
                          std::span<std::uint32_t> out_minus) noexcept {
    double s = 0.0, hi = 0.0, lo = 0.0;
    std::uint32_t up = 1, down = 1;
    for (std::size_t k = 0; k < returns.size(); ++k) {
        s += returns[k];
        if (s > hi) {
            hi = s;
            ++up;
        }
        if (s < lo) {
            lo = s;
            ++down;
        }
        out_plus[k] = up;
        out_minus[k] = down;
    }
}

double r0_mean(std::span<const double> returns, std::size_t num_permutations,
               std::uint64_t master_seed) {
    if (num_permutations == 0) throw InputError("num_permutations must be at least 1");
    std::vector<double> buffer(returns.size());
    long total = 0;
    for (std::size_t j = 0; j < num_permutations; ++j) {
        std::copy(returns.begin(), returns.end(), buffer.begin());
        SplitMix64 rng(derive_seed(master_seed, StreamPurpose::permutation, j));
        shuffle(std::span<double>(buffer), rng);
        total += record_difference(buffer);
    }
    return static_cast<double>(total) / static_cast<double>(num_permutations);
}

RecordSummary r0_statistic(const ReturnSeries& series, std::size_t num_permutations,
                           std::uint64_t master_seed) {
    if (series.size() < 2) throw InputError("r0_statistic needs at least 2 returns");
    RecordSummary s = count_records(series.values());
    s.r0 = r0_mean(series.values(), num_permutations, master_seed);
    s.num_permutations = num_permutations;
    s.master_seed = master_seed;
    return s;
}

double exhaustive_r0(std::span<const double> returns, std::size_t max_length) {
    if (returns.empty()) throw InputError("exhaustive_r0 needs at least one return");
    if (returns.size() > max_length)
        throw InputError("exhaustive_r0 refuses n = " + std::to_string(returns.size()) +
                         " (bound " + std::to_string(max_length) + ")");
    std::vector<double> order(returns.begin(), returns.end());
    std::sort(order.begin(), order.end());
    // Each distinct arrangement of a multiset stands for the same number of
    // raw orderings, so the plain average over distinct arrangements is exact.
    long total = 0;
    long count = 0;
    do {
        total += record_difference(order);
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    return static_cast<double>(total) / static_cast<double>(count);
}

} // namespace recsharpe
