#include "recsharpe/student_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace recsharpe {

double student_log_likelihood(std::span<const double> x, double nu, double location, double scale) {
    const double n = static_cast<double>(x.size());
    double tail = 0.0;
    for (const double v : x) {
        const double z = (v - location) / scale;
        tail += std::log1p(z * z / nu);
    }
    return n * (std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
                std::log(scale)) -
           0.5 * (nu + 1.0) * tail;
}

namespace {

constexpr int kMaxEmIterations = 5000;
constexpr double kEmTolerance = 1e-11;

struct LocationScale {
    double location;
    double scale;
};

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// Robust, location/scale-equivariant starting point.
LocationScale initial_guess(std::span<const double> x) {
    std::vector<double> v(x.begin(), x.end());
    const double med = median(v);
    for (double& e : v) e = std::abs(e - med);
    double mad = 1.4826 * median(v);
    if (!(mad > 0.0)) {
        double mean = 0.0;
        for (const double e : x) mean += e;
        mean /= static_cast<double>(x.size());
        double ss = 0.0;
        for (const double e : x) ss += (e - mean) * (e - mean);
        mad = std::sqrt(ss / static_cast<double>(x.size()));
    }
    if (!(mad > 0.0)) throw InputError("student fit needs data with nonzero dispersion");
    return {med, mad};
}

// EM for fixed nu; returns the maximizing (location, scale).
LocationScale em_fit(std::span<const double> x, double nu, LocationScale start, double& loglik) {
    const double n = static_cast<double>(x.size());
    LocationScale cur = start;
    for (int iter = 0; iter < kMaxEmIterations; ++iter) {
        double sw = 0.0, swx = 0.0;
        for (const double v : x) {
            const double z = (v - cur.location) / cur.scale;
            const double w = (nu + 1.0) / (nu + z * z);
            sw += w;
            swx += w * v;
        }
        const double loc = swx / sw;
        double ss = 0.0;
        for (const double v : x) {
            const double z = (v - cur.location) / cur.scale;
            const double w = (nu + 1.0) / (nu + z * z);
            ss += w * (v - loc) * (v - loc);
        }
        const double scale = std::sqrt(ss / n);
        if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(loc)) break;
        const bool done = std::abs(loc - cur.location) <= kEmTolerance * scale &&
                          std::abs(scale - cur.scale) <= kEmTolerance * scale;
        cur = {loc, scale};
        if (done) {
            loglik = student_log_likelihood(x, nu, cur.location, cur.scale);
            return cur;
        }
    }
    loglik = student_log_likelihood(x, nu, cur.location, cur.scale);
    throw StudentFitError("EM did not converge at nu = " + std::to_string(nu),
                          StudentFit{nu, cur.location, cur.scale, loglik, false});
}

} // namespace

StudentFit fit_student_nu(std::span<const double> x) {
    if (x.size() < kNuFitMinLength)
        throw InputError("student fit needs at least " + std::to_string(kNuFitMinLength) + " observations");
    for (const double v : x)
        if (!std::isfinite(v)) throw InputError("student fit got a non-finite value");
    // Fit on standardized data so the search path, and hence nu, is invariant
    // under exact rescaling and negation of the input.
    const LocationScale robust = initial_guess(x);
    std::vector<double> standardized(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) standardized[i] = (x[i] - robust.location) / robust.scale;
    const std::span<const double> y(standardized);
    const LocationScale start{0.0, 1.0};

    constexpr std::size_t kGrid = 24;
    const double log_lo = std::log(kNuFitMin), log_hi = std::log(kNuFitMax);
    std::vector<double> grid(kGrid), ll(kGrid);
    std::vector<LocationScale> fits(kGrid);
    for (std::size_t i = 0; i < kGrid; ++i) {
        grid[i] = log_lo + (log_hi - log_lo) * static_cast<double>(i) / static_cast<double>(kGrid - 1);
        fits[i] = em_fit(y, std::exp(grid[i]), start, ll[i]);
    }
    const auto best = static_cast<std::size_t>(std::distance(ll.begin(), std::max_element(ll.begin(), ll.end())));

    // Golden-section refinement of the profile likelihood in log nu.
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[best + 1 == kGrid ? kGrid - 1 : best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    LocationScale warm = fits[best];
    auto profile = [&](double log_nu, LocationScale& out) {
        double value = 0.0;
        out = em_fit(y, std::exp(log_nu), warm, value);
        return value;
    };
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    LocationScale fc{}, fd{};
    double vc = profile(c, fc), vd = profile(d, fd);
    while (b - a > 1e-7) {
        if (vc > vd) {
            b = d;
            d = c;
            vd = vc;
            fd = fc;
            c = b - inv_phi * (b - a);
            vc = profile(c, fc);
        } else {
            a = c;
            c = d;
            vc = vd;
            fc = fd;
            d = a + inv_phi * (b - a);
            vd = profile(d, fd);
        }
    }
    StudentFit result;
    double log_nu = vc > vd ? c : d;
    LocationScale ls = vc > vd ? fc : fd;
    double value = std::max(vc, vd);
    if (ll[best] > value) {
        log_nu = grid[best];
        ls = fits[best];
        value = ll[best];
    }
    result.nu = std::exp(log_nu);
    result.location = robust.location + robust.scale * ls.location;
    result.scale = robust.scale * ls.scale;
    result.log_likelihood = value - static_cast<double>(x.size()) * std::log(robust.scale);
    if (result.nu >= kNuFitMax * (1.0 - 1e-4)) {
        result.nu = kNuFitMax;
        result.gaussian = true;
    }
    return result;
}

} // namespace recsharpe
