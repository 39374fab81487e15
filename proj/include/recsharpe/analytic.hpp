#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "recsharpe/errors.hpp"
#include "recsharpe/power_series.hpp"

namespace recsharpe {

// Apery's constant zeta(3). The large-drift Student rate uses it as the
// constant K, which is often quoted as ~6/5.
inline constexpr double kZeta3 = 1.2020569031595942854;

// Universal law of the record number R in {1..n+1} for symmetric continuous
// i.i.d. increments: P(R, n) = C(2n - R + 1, n) 2^{-2n + R - 1}.
// Element R - 1 of the result holds P(R, n).
std::vector<double> driftless_record_pmf(std::size_t n);

struct DriftlessMoments {
    double mean = 0.0;
    double variance = 0.0;
};

// Large-n approximations E(R) ~ 2 sqrt(n / pi) and Var(R) ~ (2 - 4/pi) n.
DriftlessMoments driftless_moments(std::size_t n);

// Expected upper records for Gaussian increments at small relative drift:
// 2 sqrt(n/pi) + c sqrt(2) / (sigma pi) [n atan(sqrt n) - sqrt n].
// Valid for c/sigma << 1, n >> 1 and c n / sigma << 1.
double gaussian_expected_records(double c, double sigma, std::size_t n);

// Gaussian small-drift value plus the Student (nu = 3) correction
// (c/sigma) 8 / (sqrt 3 pi^{3/2}) sqrt n (atanh sqrt(1 - 1/n) - sqrt(1 - 1/n)).
// Only the shape is reliable; the prefactor comes from a rough resummation.
double student3_expected_records(double c, double sigma, std::size_t n);

enum class SurvivalSource { analytic, from_sign_probabilities, simulated };

// Persistence q_-(k) = P(S_1 < 0, ..., S_k < 0) for k = 1..n_max.
struct SurvivalSeries {
    std::vector<double> q_minus; // q_minus[k - 1] = q_-(k)
    SurvivalSource source = SurvivalSource::analytic;

    std::size_t n_max() const noexcept { return q_minus.size(); }
    // q_-(0) = 1 by convention.
    double q(std::size_t k) const { return k == 0 ? 1.0 : q_minus.at(k - 1); }
};

// Sparre Andersen: sum_k q_-(k) z^k = exp(sum_n P(S_n < 0) z^n / n), truncated at
// n_max = size of the input. Generic over the scalar so exact rationals can be
// used where the inputs allow it; element 0 of the result is q_-(0) = 1.
template <typename Scalar>
PowerSeries<Scalar> survival_series(std::span<const Scalar> sign_probabilities) {
    if (sign_probabilities.empty()) throw InputError("sign probability list is empty");
    PowerSeries<Scalar> log_q(sign_probabilities.size() + 1);
    for (std::size_t n = 1; n <= sign_probabilities.size(); ++n)
        log_q[n] = sign_probabilities[n - 1] / Scalar(static_cast<long>(n));
    return log_q.exp();
}

// Coefficients m_+(0..n_max) of 1 / ((1 - z)^2 q~_-(z)).
template <typename Scalar>
PowerSeries<Scalar> expected_records_series(const PowerSeries<Scalar>& survival) {
    const auto denom = PowerSeries<Scalar>::one_minus_z_pow(2, survival.order()) * survival;
    return denom.inverse();
}

SurvivalSeries survival_from_sign_probabilities(std::span<const double> p_neg);

// m_+(k) for k = 0..n_max.
std::vector<double> expected_records_from_survival(const SurvivalSeries& q);

// Density at 0 of the n-fold convolution of a Student t (nu = 3) of standard
// deviation sigma: (1 / (sigma pi)) (1/n) (n! / n^n) sum_{s=0}^{n} n^s / s!.
// Evaluated as sum_j prod_{i<j} (n - i) / n, which never overflows.
double student3_convolution_density_at_zero(std::size_t n, double sigma = 1.0);

// Two-term large-n expansion 1/(sigma sqrt(2 pi n)) + 2 / (sigma pi sqrt(3) n).
double student3_convolution_density_asymptotic(std::size_t n, double sigma = 1.0);

// Length n0 beyond which power-law tails of t3 convolutions dominate at drift
// ratio c/sigma: upper root of (c/sigma) sqrt(n0) = sqrt(log n0). nullopt when
// the equation has no root in (e, 1e9].
std::optional<std::size_t> crossover_n0(double c_over_sigma);

enum class RateDistribution { gaussian, student3 };

struct RecordRate {
    double rate = 0.0;
    // Set when the asymptotic formula gives a negative rate.
    bool out_of_regime = false;
};

// Asymptotic slope dE(R_+)/dn at large drift:
//   student3: 1 - (sigma/c)^3 (2 / (3 pi)) zeta(3)
//   gaussian: 1 - (sigma/c) exp(-c^2 / (2 sigma^2)) / sqrt(2 pi)
RecordRate large_drift_record_rate(RateDistribution distribution, double c_over_sigma);

} // namespace recsharpe
