#include "recsharpe/analytic.hpp"

#include <cmath>
#include <numbers>

namespace recsharpe {

std::vector<double> driftless_record_pmf(std::size_t n) {
    if (n == 0) throw InputError("driftless_record_pmf needs n >= 1");
    std::vector<double> pmf(n + 1);
    // P(1, n) = C(2n, n) 4^{-n} = prod_{k=1}^{n} (2k - 1) / (2k).
    double p = 1.0;
    for (std::size_t k = 1; k <= n; ++k) p *= static_cast<double>(2 * k - 1) / static_cast<double>(2 * k);
    pmf[0] = p;
    // P(R + 1) / P(R) = 2 (n - R + 1) / (2n - R + 1).
    for (std::size_t r = 1; r <= n; ++r) {
        p *= 2.0 * static_cast<double>(n - r + 1) / static_cast<double>(2 * n - r + 1);
        pmf[r] = p;
    }
    return pmf;
}

DriftlessMoments driftless_moments(std::size_t n) {
    if (n == 0) throw InputError("driftless_moments needs n >= 1");
    const double nn = static_cast<double>(n);
    return {2.0 * std::sqrt(nn / std::numbers::pi), (2.0 - 4.0 / std::numbers::pi) * nn};
}

double gaussian_expected_records(double c, double sigma, std::size_t n) {
    if (!(sigma > 0.0)) throw InputError("sigma must be positive");
    const double nn = static_cast<double>(n);
    const double root = std::sqrt(nn);
    return 2.0 * std::sqrt(nn / std::numbers::pi) +
           c * std::numbers::sqrt2 / (sigma * std::numbers::pi) * (nn * std::atan(root) - root);
}

double student3_expected_records(double c, double sigma, std::size_t n) {
    if (!(sigma > 0.0)) throw InputError("sigma must be positive");
    if (n < 2) throw InputError("student3_expected_records needs n >= 2");
    const double nn = static_cast<double>(n);
    const double u = std::sqrt(1.0 - 1.0 / nn);
    const double prefactor = 8.0 / (std::sqrt(3.0) * std::pow(std::numbers::pi, 1.5));
    return gaussian_expected_records(c, sigma, n) + (c / sigma) * prefactor * std::sqrt(nn) * (std::atanh(u) - u);
}

SurvivalSeries survival_from_sign_probabilities(std::span<const double> p_neg) {
    for (const double p : p_neg)
        if (!(p >= 0.0 && p <= 1.0)) throw InputError("sign probabilities must lie in [0, 1]");
    const auto series = survival_series<double>(p_neg);
    SurvivalSeries out;
    out.source = SurvivalSource::from_sign_probabilities;
    out.q_minus.assign(series.coefficients().begin() + 1, series.coefficients().end());
    return out;
}

std::vector<double> expected_records_from_survival(const SurvivalSeries& q) {
    if (q.q_minus.empty()) throw InputError("survival series is empty");
    std::vector<double> coeffs(q.n_max() + 1);
    coeffs[0] = 1.0;
    std::copy(q.q_minus.begin(), q.q_minus.end(), coeffs.begin() + 1);
    return expected_records_series(PowerSeries<double>(std::move(coeffs))).coefficients();
}

double student3_convolution_density_at_zero(std::size_t n, double sigma) {
    if (n == 0) throw InputError("n must be at least 1");
    if (!(sigma > 0.0)) throw InputError("sigma must be positive");
    // (n! / n^n) sum_{s<=n} n^s / s! = sum_{j=0}^{n} n! / ((n - j)! n^j).
    const double nn = static_cast<double>(n);
    double term = 1.0, sum = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        term *= static_cast<double>(n - j + 1) / nn;
        if (term < 1e-300) break;
        sum += term;
    }
    return sum / (sigma * std::numbers::pi * nn);
}

double student3_convolution_density_asymptotic(std::size_t n, double sigma) {
    if (n == 0) throw InputError("n must be at least 1");
    if (!(sigma > 0.0)) throw InputError("sigma must be positive");
    const double nn = static_cast<double>(n);
    return 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi * nn)) +
           2.0 / (sigma * std::numbers::pi * std::sqrt(3.0) * nn);
}

std::optional<std::size_t> crossover_n0(double c_over_sigma) {
    if (!(c_over_sigma > 0.0) || !std::isfinite(c_over_sigma)) throw InputError("c/sigma must be positive");
    // g(x) = ratio * sqrt(n) - sqrt(log n) with n = e^x; minimum at n = e.
    const auto g = [c_over_sigma](double x) { return c_over_sigma * std::exp(0.5 * x) - std::sqrt(x); };
    double lo = 1.0;              // log e
    double hi = std::log(1e9);
    if (g(lo) >= 0.0 || g(hi) < 0.0) return std::nullopt;
    // Bisection on log n until the bracket is narrower than 0.5 in n.
    while (std::exp(hi) - std::exp(lo) > 0.5) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return static_cast<std::size_t>(std::ceil(std::exp(hi) - 1e-9));
}

RecordRate large_drift_record_rate(RateDistribution distribution, double c_over_sigma) {
    if (!(c_over_sigma > 0.0) || !std::isfinite(c_over_sigma)) throw InputError("c/sigma must be positive");
    const double inv = 1.0 / c_over_sigma;
    double rate = 0.0;
    if (distribution == RateDistribution::student3) {
        rate = 1.0 - inv * inv * inv * (2.0 / (3.0 * std::numbers::pi)) * kZeta3;
    } else {
        rate = 1.0 - inv * std::exp(-0.5 * c_over_sigma * c_over_sigma) / std::sqrt(2.0 * std::numbers::pi);
    }
    return {rate, rate < 0.0};
}

} // namespace recsharpe
