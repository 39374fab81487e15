#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "recsharpe/errors.hpp"
#include "recsharpe/records.hpp"
#include "recsharpe/synthetic.hpp"

using namespace recsharpe;

namespace {

// Direct definition on the materialized path, kept deliberately naive.
std::pair<std::size_t, std::size_t> naive_records(const std::vector<double>& returns, double drift = 0.0) {
    std::vector<double> s{0.0};
    for (const double r : returns) s.push_back(s.back() + r + drift);
    std::size_t up = 0, down = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        bool is_up = true, is_down = true;
        for (std::size_t j = 0; j < k; ++j) {
            is_up = is_up && s[k] > s[j];
            is_down = is_down && s[k] < s[j];
        }
        up += is_up;
        down += is_down;
    }
    return {up, down};
}

} // namespace

TEST_SUITE("records") {
TEST_CASE("constant positive returns give n + 1 upper records") {
    const auto s = count_records(std::vector<double>{1, 1, 1});
    CHECK(s.r_plus == 4);
    CHECK(s.r_minus == 1);
    CHECK(s.t_minus == 0);
    CHECK(s.t_plus == 3);
}

TEST_CASE("ties are not records") {
    const auto s = count_records(std::vector<double>{0, 0, 0});
    CHECK(s.r_plus == 1);
    CHECK(s.r_minus == 1);
    const auto t = count_records(std::vector<double>{1, -1, 1});
    CHECK(t.r_plus == 2); // 0 -> 1 is a record, returning to 1 is a tie
    CHECK(t.r_minus == 1);
}

TEST_CASE("path and span overloads agree with the naive definition") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.bounded(60);
        std::vector<double> r(n);
        for (auto& v : r) v = static_cast<double>(static_cast<int>(rng.bounded(5)) - 2); // many ties
        const auto [up, down] = naive_records(r);
        const auto a = count_records(r);
        const auto b = count_records(PricePath::from_returns(r));
        CHECK(a.r_plus == up);
        CHECK(a.r_minus == down);
        CHECK(b.r_plus == up);
        CHECK(b.r_minus == down);
        CHECK(a.r_plus + a.t_minus == n + 1);
        CHECK(a.r_minus + a.t_plus == n + 1);
        CHECK(record_difference(r) == static_cast<long>(up) - static_cast<long>(down));
    }
}

TEST_CASE("multi-drift kernel equals per-drift evaluation") {
    SplitMix64 rng(11);
    const std::vector<double> drifts{-0.3, -0.01, 0.0, 0.001, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    for (const std::size_t n : {1ul, 2ul, 7ul, 20ul, 100ul, 333ul}) {
        std::vector<double> x(n);
        draw_increments(IncrementSpec::student(3.0), rng, x);
        std::vector<double> out(drifts.size(), 0.5);
        accumulate_record_differences(x, drifts, out);
        for (std::size_t j = 0; j < drifts.size(); ++j) {
            const auto [up, down] = naive_records(x, drifts[j]);
            CHECK(out[j] == 0.5 + static_cast<double>(static_cast<long>(up) - static_cast<long>(down)));
        }
    }
}

TEST_CASE("prefix counts match counts of each prefix") {
    const std::vector<double> r{0.5, -1.0, 2.0, 0.0, -3.0, 1.5, 1.0};
    std::vector<std::uint32_t> up(r.size()), down(r.size());
    prefix_record_counts(r, up, down);
    for (std::size_t k = 1; k <= r.size(); ++k) {
        const auto s = count_records(std::span<const double>(r).first(k));
        CHECK(up[k - 1] == s.r_plus);
        CHECK(down[k - 1] == s.r_minus);
    }
}

TEST_CASE("negation swaps upper and lower records exactly") {
    SplitMix64 rng(3);
    std::vector<double> x(50);
    draw_increments(IncrementSpec::gaussian(1.0, 0.1), rng, x);
    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    const auto a = count_records(x), b = count_records(neg);
    CHECK(a.r_plus == b.r_minus);
    CHECK(a.r_minus == b.r_plus);
    CHECK(r0_mean(x, 200, 5) == -r0_mean(neg, 200, 5));
}

TEST_CASE("R0 is deterministic in the seed and invariant to positive scaling") {
    const ReturnSeries s = generate_series(IncrementSpec::student(4.0, 1.0, 0.1), 120, 42);
    const auto a = r0_statistic(s, 300, 9), b = r0_statistic(s, 300, 9);
    CHECK(*a.r0 == *b.r0);
    CHECK(a.num_permutations == 300);
    CHECK(a.master_seed == 9);
    CHECK(*r0_statistic(s.scaled(0.01), 300, 9).r0 == *a.r0);
}

TEST_CASE("permutation average converges to the exhaustive average") {
    const std::vector<double> x{0.3, -0.1, 0.7, 0.2, -0.4, 0.05};
    const double exact = exhaustive_r0(x);
    // Oracle: brute-force over all 720 orderings with the naive counter.
    std::vector<double> p = x;
    std::sort(p.begin(), p.end());
    double total = 0.0;
    std::size_t count = 0;
    do {
        const auto [up, down] = naive_records(p);
        total += static_cast<double>(up) - static_cast<double>(down);
        ++count;
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(count == 720);
    CHECK(exact == doctest::Approx(total / 720.0).epsilon(1e-14));
    CHECK(r0_mean(x, 20000, 1) == doctest::Approx(exact).epsilon(0.03));
}

TEST_CASE("exhaustive average handles repeated values") {
    const std::vector<double> x{1.0, 1.0, -1.0};
    // Distinct orderings: (1,1,-1): 3-1=2, (1,-1,1): 2-1=1, (-1,1,1): 2-2=0.
    CHECK(exhaustive_r0(x) == doctest::Approx((2.0 + 1.0 + 0.0) / 3.0));
    CHECK_THROWS_AS(exhaustive_r0(std::vector<double>(9, 1.0)), InputError);
}

TEST_CASE("R0 needs at least two returns") {
    CHECK_THROWS_AS(r0_statistic(ReturnSeries({1.0})), InputError);
}
}
