#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "recsharpe/errors.hpp"
#include "recsharpe/student_fit.hpp"
#include "recsharpe/synthetic.hpp"

using namespace recsharpe;

TEST_SUITE("student_fit") {
TEST_CASE("log likelihood matches the boost density") {
    const std::vector<double> x{-1.0, 0.2, 3.0};
    const double nu = 4.5, loc = 0.3, scale = 1.7;
    const boost::math::students_t t(nu);
    double expected = 0.0;
    for (const double v : x) expected += std::log(boost::math::pdf(t, (v - loc) / scale) / scale);
    CHECK(student_log_likelihood(x, nu, loc, scale) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("recovers the tail index of large samples") {
    for (const double nu : {3.0, 5.0}) {
        const auto s = generate_series(IncrementSpec::student(nu, 0.02, 0.001), 20000, 99);
        const StudentFit fit = fit_student_nu(s.values());
        CHECK_FALSE(fit.gaussian);
        CHECK(fit.nu == doctest::Approx(nu).epsilon(0.15));
        CHECK(fit.location == doctest::Approx(0.001).epsilon(0.5));
    }
}

TEST_CASE("Gaussian samples hit the upper bound") {
    const auto s = generate_series(IncrementSpec::gaussian(), 20000, 5);
    const StudentFit fit = fit_student_nu(s.values());
    CHECK(fit.gaussian);
    CHECK(fit.nu == kNuFitMax);
}

TEST_CASE("fit is exactly equivariant under power-of-two scaling and negation") {
    const auto s = generate_series(IncrementSpec::student(4.0), 300, 8);
    const StudentFit a = fit_student_nu(s.values());
    const StudentFit b = fit_student_nu(s.scaled(8.0).values());
    const StudentFit c = fit_student_nu(s.negated().values());
    CHECK(a.nu == b.nu);
    CHECK(a.nu == c.nu);
    CHECK(b.scale == 8.0 * a.scale);
    CHECK(c.location == -a.location);
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(fit_student_nu(std::vector<double>(10, 1.0)), InputError);
    CHECK_THROWS_AS(fit_student_nu(std::vector<double>(50, 1.0)), InputError);
}
}
