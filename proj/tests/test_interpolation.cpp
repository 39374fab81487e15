#include <doctest.h>

#include <cmath>
#include <vector>

#include "recsharpe/errors.hpp"
#include "recsharpe/interpolation.hpp"
#include "recsharpe/seeding.hpp"

using namespace recsharpe;

namespace {

// Brute-force isotonic fit for short inputs: the minimum over all
// non-decreasing sequences whose values are block means of y.
double sse(const std::vector<double>& y, const std::vector<double>& w, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * (y[i] - f[i]) * (y[i] - f[i]);
    return s;
}

} // namespace

TEST_SUITE("interpolation") {
TEST_CASE("isotonic regression pools violators") {
    const std::vector<double> y{1.0, 3.0, 2.0, 4.0};
    const auto f = isotonic_regression(y);
    CHECK(f == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    const std::vector<double> w{1.0, 1.0, 3.0, 1.0};
    const auto g = isotonic_regression(y, w);
    CHECK(g[1] == doctest::Approx(2.25));
    CHECK(g[2] == doctest::Approx(2.25));
    CHECK(isotonic_regression(std::vector<double>{3.0, 2.0, 1.0}) == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("isotonic regression is optimal against random monotone candidates") {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> y(6), w(6);
        for (std::size_t i = 0; i < 6; ++i) {
            y[i] = rng.uniform() * 4.0 + 0.3 * static_cast<double>(i);
            w[i] = 0.5 + rng.uniform();
        }
        const auto f = isotonic_regression(y, w);
        for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] >= f[i - 1]);
        const double best = sse(y, w, f);
        for (int c = 0; c < 200; ++c) {
            std::vector<double> g(6);
            double level = rng.uniform() * 2.0 - 1.0;
            for (auto& v : g) v = (level += rng.uniform());
            CHECK(sse(y, w, g) >= best - 1e-12);
        }
    }
}

TEST_CASE("monotone cubic interpolates, preserves shape and inverts") {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{0.0, 0.1, 0.2, 5.0, 5.1};
    const MonotoneCubic f(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(f.value(x[i]) == doctest::Approx(y[i]));
    double prev = -1.0;
    for (double t = 0.0; t <= 4.0; t += 0.01) {
        const double v = f.value(t);
        CHECK(v >= prev - 1e-15);
        CHECK(v <= 5.1 + 1e-15);
        CHECK(f.derivative(t) >= 0.0);
        prev = v;
    }
    for (const double target : {0.05, 1.0, 3.3, 5.05}) CHECK(f.value(f.inverse(target)) == doctest::Approx(target));
    CHECK(f.value(-1.0) == 0.0);
    CHECK(f.value(9.0) == 5.1);
    CHECK(f.derivative(9.0) == 0.0);
    CHECK(f.inverse(99.0) == 4.0);
}

TEST_CASE("monotone cubic reproduces straight lines") {
    const MonotoneCubic f({0.0, 1.0, 3.0}, {1.0, 3.0, 7.0});
    CHECK(f.value(2.0) == doctest::Approx(5.0));
    CHECK(f.derivative(0.5) == doctest::Approx(2.0));
}

TEST_CASE("monotone cubic input checks") {
    CHECK_THROWS_AS(MonotoneCubic({0.0, 0.0}, {1.0, 2.0}), InputError);
    CHECK_THROWS_AS(MonotoneCubic({0.0, 1.0}, {1.0}), InputError);
}
}
