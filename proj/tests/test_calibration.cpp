#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "recsharpe/calibration.hpp"
#include "recsharpe/errors.hpp"

using namespace recsharpe;
using recsharpe::testing::small_table;

TEST_SUITE("calibration") {
TEST_CASE("nu fit recovers an exact line") {
    const std::vector<double> nu{2.5, 3.0, 4.0, 5.0, 7.0, 10.0};
    std::vector<double> theta;
    for (const double v : nu) theta.push_back(0.3 - 0.8 * std::pow(v, -1.5));
    const FitRecord fit = fit_nu_dependence(nu, theta);
    CHECK(fit.a == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fit.b == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.mean_sq_residual < 1e-20);
    CHECK(fit.p_value_b < 1e-40);
    CHECK(fit.accepted);
}

TEST_CASE("nu fit p-value matches a hand computation") {
    const std::vector<double> nu{1.0, 4.0, 9.0, 16.0};
    const std::vector<double> theta{0.0, 0.5, 0.4, 0.7};
    const FitRecord fit = fit_nu_dependence(nu, theta);
    // Reference from an independent least-squares computation
    // (scipy.stats.linregress on x = [1, 1/8, 1/27, 1/64]).
    CHECK(fit.b == doctest::Approx(0.5709197634802936).epsilon(1e-9));
    CHECK(fit.p_value_b == doctest::Approx(0.08315922454982592).epsilon(1e-7));
    CHECK_FALSE(fit.accepted);
    CHECK_THROWS_AS(fit_nu_dependence(std::vector<double>{3, 4, 5}, std::vector<double>{1, 2, 3}), InputError);
}

TEST_CASE("inverse map is odd, monotone and round-trips") {
    const auto& table = small_table();
    const InverseMap& m = table.slice_for(50, 4.0);
    CHECK(m.expected_r0(0.0) == 0.0);
    CHECK(m.expected_r0(-0.2) == -m.expected_r0(0.2));
    double prev = 0.0;
    for (const double t : {0.001, 0.01, 0.05, 0.1, 0.3, 0.7, 1.0}) {
        const double r = m.expected_r0(t);
        CHECK(r > prev);
        CHECK(m.derivative(t) >= 0.0);
        CHECK(m.theta_for(r).theta == doctest::Approx(t).epsilon(1e-9));
        prev = r;
    }
    const auto beyond = m.theta_for(2.0 * m.r0_max());
    CHECK(beyond.clamped);
    CHECK(beyond.theta == m.theta_max());
    CHECK(m.theta_for(-3.0).theta == -m.theta_for(3.0).theta);
}

TEST_CASE("table lookups and fits") {
    const auto& table = small_table();
    CHECK(table.n_min() == 20);
    CHECK(table.n_max() == 100);
    CHECK(table.has_gaussian_slice());
    CHECK(table.n_index(50) == 1);
    CHECK_FALSE(table.n_index(51).has_value());
    CHECK(table.nu_index(kGaussianNu).has_value());
    CHECK_THROWS_AS(table.slice_for(60, 4.0), InputError);
    const FitRecord fit = table.fit_at(20.0, 100);
    CHECK(fit.n == 100);
    CHECK(fit.a > 0.0);
    CHECK(fit.b > 0.0); // heavier tails need a larger Sharpe for the same R0
    CHECK(table.fits().size() == 20 + 50 + 100);
    REQUIRE(table.simplified().has_value());
    const auto& curve = *table.simplified();
    CHECK(curve.a(0.0) == 0.0);
    CHECK(curve.a(-0.3) == -curve.a(0.3));
    CHECK(curve.a(0.2) < curve.a(0.4));
}

TEST_CASE("rank switch solves the crossing equation") {
    const auto& table = small_table();
    const auto nu = table.rank_switch_nu(15.0, 20.0, 100);
    REQUIRE(nu.has_value());
    const FitRecord lo = table.fit_at(15.0, 100), hi = table.fit_at(20.0, 100);
    CHECK(hi.a - hi.b * std::pow(*nu, -1.5) == doctest::Approx(lo.a).epsilon(1e-9));
}

TEST_CASE("save and load round-trip bit for bit") {
    const auto& table = small_table();
    std::stringstream buf;
    table.save(buf);
    const std::string text = buf.str();
    std::istringstream in(text);
    const CalibrationTable loaded = CalibrationTable::load(in);
    CHECK(loaded.checksum() == table.checksum());
    CHECK(loaded.provenance().built_at == "2024-01-01T00:00:00Z");
    CHECK(loaded.provenance().n_avg == 400);
    REQUIRE(loaded.surface_rows().size() == table.surface_rows().size());
    for (std::size_t i = 0; i < table.surface_rows().size(); ++i)
        CHECK(loaded.surface_rows()[i].mean_r0 == table.surface_rows()[i].mean_r0);
    for (std::size_t i = 0; i < table.fits().size(); ++i) {
        CHECK(loaded.fits()[i].a == table.fits()[i].a);
        CHECK(loaded.fits()[i].accepted == table.fits()[i].accepted);
    }
    CHECK(loaded.slice_for(50, 3.0).theta_for(7.0).theta == table.slice_for(50, 3.0).theta_for(7.0).theta);
    CHECK(loaded.simplified()->a(0.37) == table.simplified()->a(0.37));
    std::stringstream again;
    loaded.save(again);
    CHECK(again.str() == text);
}

TEST_CASE("checksum ignores the build timestamp") {
    SurfaceGrid grid = desk_scale_grid();
    grid.n = {20};
    const Surface s = mean_r0_surface(grid, 20, 10, 1);
    TableBuildOptions no_curve;
    const auto a = CalibrationTable::build(s, no_curve, "2020-01-01");
    const auto b = CalibrationTable::build(s, no_curve, "2030-01-01");
    CHECK(a.checksum() == b.checksum());
    CHECK_FALSE(a.simplified().has_value());
    CHECK_FALSE(a.simplified_error().empty());
}

TEST_CASE("corrupt, truncated and foreign tables are rejected") {
    const auto& table = small_table();
    std::stringstream buf;
    table.save(buf);
    std::string text = buf.str();

    std::string corrupt = text;
    const auto pos = corrupt.find("surface");
    corrupt[corrupt.find('.', pos) + 3] ^= 1; // flip a digit in the first surface row
    std::istringstream c(corrupt);
    CHECK_THROWS_AS(CalibrationTable::load(c), FormatError);

    std::istringstream t(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(CalibrationTable::load(t), FormatError);

    std::string version = text;
    version.replace(version.find("version 1"), 9, "version 9");
    std::istringstream v(version);
    try {
        CalibrationTable::load(v);
        FAIL("version mismatch accepted");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("version 9") != std::string::npos);
    }

    std::istringstream junk("hello\n");
    CHECK_THROWS_AS(CalibrationTable::load(junk), FormatError);
    CHECK_THROWS_AS(CalibrationTable::load(std::string("/nonexistent/table.txt")), FormatError);
}

TEST_CASE("simplified curve coverage rules") {
    std::vector<FitRecord> fits;
    for (int i = 1; i <= 60; ++i) {
        FitRecord f;
        f.n = 100;
        f.r0 = 0.5 * i; // r up to 0.3 only
        f.a = 0.01 * i;
        f.b = 0.02 * i;
        f.accepted = true;
        fits.push_back(f);
    }
    try {
        build_simplified_curve(fits);
        FAIL("short coverage accepted");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("0.8") != std::string::npos);
    }
    SimplifiedCurveOptions loose;
    loose.min_last_r = 0.3;
    const auto curve = build_simplified_curve(fits, loose);
    CHECK(curve.fits_used == 60);
    CHECK(curve.b_over_a_slope == doctest::Approx(2.0));
    bool clamped = false;
    curve.a(0.9, &clamped);
    CHECK(clamped);
}
}
