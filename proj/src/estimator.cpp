#include "recsharpe/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "recsharpe/errors.hpp"
#include "recsharpe/parallel.hpp"

namespace recsharpe {

const char* to_string(EstimationMethod method) noexcept {
    switch (method) {
    case EstimationMethod::table_inverse: return "table";
    case EstimationMethod::simplified: return "simplified";
    case EstimationMethod::vanilla: return "vanilla";
    }
    return "unknown";
}

EstimationMethod parse_method(const std::string& text) {
    if (text == "table" || text == "table-inverse") return EstimationMethod::table_inverse;
    if (text == "simplified") return EstimationMethod::simplified;
    if (text == "vanilla") return EstimationMethod::vanilla;
    throw InputError("unknown estimation method '" + text + "'");
}

double vanilla_sharpe(std::span<const double> returns) {
    if (returns.size() < 2) throw InputError("vanilla Sharpe needs at least 2 returns");
    CompensatedSum sum;
    for (const double r : returns) sum.add(r);
    const double mean = sum.value() / static_cast<double>(returns.size());
    CompensatedSum ss;
    for (const double r : returns) ss.add((r - mean) * (r - mean));
    const double var = ss.value() / static_cast<double>(returns.size() - 1);
    if (!(var > 0.0)) throw NumericError("vanilla Sharpe undefined: zero variance");
    return mean / std::sqrt(var);
}

bool EstimateDiagnostics::has(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void EstimateDiagnostics::add(const std::string& flag) {
    if (!has(flag)) flags.push_back(flag);
}

double heavy_tail_factor(double nu) noexcept {
    if (std::isinf(nu)) return 1.0;
    return 1.0 - (8.0 / 3.0) * std::pow(nu, -1.5);
}

namespace {

double nu_coordinate(double nu) { return std::isinf(nu) ? 0.0 : std::pow(nu, -1.5); }

// theta at grid size index i_n, linear in x = nu^{-3/2} between slices.
double blend_nu(const CalibrationTable& table, std::size_t i_n, double r0, double nu, EstimateDiagnostics& diag) {
    const auto& nus = table.grid().nu;
    if (nu < nus.front()) {
        diag.add("nu_clamped_low");
        nu = nus.front();
    }
    const auto lookup = [&](std::size_t i_nu) {
        const auto res = table.slice(i_n, i_nu).theta_for(r0);
        if (res.clamped) diag.add("boundary");
        return res.theta;
    };
    if (const auto exact = table.nu_index(nu)) return lookup(*exact);
    // nus ascending <=> x descending.
    const auto upper = std::upper_bound(nus.begin(), nus.end(), nu);
    if (upper == nus.end()) {
        // Beyond the largest finite slice with no Gaussian slice: extend the
        // straight line in x through the two most Gaussian slices.
        if (nus.size() < 2) throw NumericError("cannot extrapolate in nu from a single slice");
        diag.add("nu_extrapolated");
        const std::size_t i1 = nus.size() - 1, i2 = nus.size() - 2;
        const double x = nu_coordinate(nu), x1 = nu_coordinate(nus[i1]), x2 = nu_coordinate(nus[i2]);
        const double t1 = lookup(i1), t2 = lookup(i2);
        return t1 + (t2 - t1) * (x - x1) / (x2 - x1);
    }
    const auto hi = static_cast<std::size_t>(std::distance(nus.begin(), upper));
    const std::size_t lo = hi - 1;
    const double x = nu_coordinate(nu), x_lo = nu_coordinate(nus[lo]), x_hi = nu_coordinate(nus[hi]);
    const double w = (x_lo - x) / (x_lo - x_hi);
    return (1.0 - w) * lookup(lo) + w * lookup(hi);
}

double simplified_theta(const CalibrationTable& table, double r0, std::size_t n, double nu, EstimateDiagnostics& diag) {
    if (!table.simplified()) throw InputError("calibration table has no simplified curve: " + table.simplified_error());
    if (nu < kMinCalibratedNu) {
        diag.add("nu_clamped_low");
        nu = kMinCalibratedNu;
    }
    bool clamped = false;
    const double a = table.simplified()->a(r0 / static_cast<double>(n), &clamped);
    if (clamped) diag.add("boundary");
    return a * heavy_tail_factor(nu);
}

} // namespace

double theta_from_r0(const CalibrationTable& table, double r0, std::size_t n, double nu, EstimationMethod method,
                     EstimateDiagnostics& diag) {
    if (n == 0) throw InputError("n must be positive");
    if (std::abs(r0) >= static_cast<double>(n)) diag.add("boundary");
    if (method == EstimationMethod::simplified) return simplified_theta(table, r0, n, nu, diag);
    if (method != EstimationMethod::table_inverse) throw InputError("theta_from_r0 handles record methods only");

    const auto& ns = table.grid().n;
    if (n < ns.front() || n > ns.back()) {
        if (!table.simplified())
            throw InputError("n = " + std::to_string(n) + " is outside the table range [" + std::to_string(ns.front()) +
                             ", " + std::to_string(ns.back()) + "] and the table has no simplified curve");
        diag.add("n_outside_table");
        return simplified_theta(table, r0, n, nu, diag);
    }
    if (const auto exact = table.n_index(n)) return blend_nu(table, *exact, r0, nu, diag);
    const auto upper = std::upper_bound(ns.begin(), ns.end(), n);
    const auto hi = static_cast<std::size_t>(std::distance(ns.begin(), upper));
    const std::size_t lo = hi - 1;
    const double nn = static_cast<double>(n);
    // Neighbouring slices are read at equal R_0 / n.
    const double t_lo = blend_nu(table, lo, r0 * static_cast<double>(ns[lo]) / nn, nu, diag);
    const double t_hi = blend_nu(table, hi, r0 * static_cast<double>(ns[hi]) / nn, nu, diag);
    const double w = (nn - static_cast<double>(ns[lo])) / static_cast<double>(ns[hi] - ns[lo]);
    return (1.0 - w) * t_lo + w * t_hi;
}

SharpeEstimate estimate_sharpe(const ReturnSeries& series, const CalibrationTable& table,
                               const EstimateOptions& options) {
    if (series.size() < kMinEstimateLength)
        throw InputError("estimation needs at least " + std::to_string(kMinEstimateLength) + " returns");
    SharpeEstimate est;
    est.n = series.size();
    est.method = options.method;
    est.diagnostics.seed = options.seed;
    est.diagnostics.permutations = options.permutations;
    est.r0 = r0_mean(series.values(), options.permutations, options.seed);

    if (options.nu_override) {
        est.nu_gaussian = std::isinf(*options.nu_override);
        est.nu_hat = est.nu_gaussian ? kNuFitMax : *options.nu_override;
    } else {
        try {
            const StudentFit fit = fit_student_nu(series.values());
            est.nu_hat = fit.nu;
            est.nu_gaussian = fit.gaussian;
        } catch (const std::exception&) {
            // Degenerate windows (e.g. constant returns) have no tail index.
            est.diagnostics.add("nu_fit_failed");
            est.nu_hat = kNuFitMax;
            est.nu_gaussian = true;
        }
    }
    const double nu = est.nu_gaussian ? kGaussianNu : est.nu_hat;

    if (options.method == EstimationMethod::vanilla) {
        est.theta = vanilla_sharpe(series.values());
    } else {
        est.theta = theta_from_r0(table, est.r0, est.n, nu, options.method, est.diagnostics);
    }
    if (options.periods_per_year) est.theta_annualized = est.theta * std::sqrt(*options.periods_per_year);
    return est;
}

std::vector<EfficiencyReport> efficiency_study(const IncrementSpec& spec, std::span<const std::size_t> n_list,
                                               std::span<const double> theta_list, std::size_t n_avg,
                                               std::size_t permutations, std::uint64_t master_seed,
                                               const CalibrationTable& table, std::size_t jobs) {
    spec.validate();
    if (n_list.empty() || theta_list.empty()) throw InputError("efficiency study needs non-empty grids");
    if (n_avg < 2) throw InputError("efficiency study needs n_avg >= 2");
    for (const double t : theta_list)
        if (!(t > 0.0)) throw InputError("efficiency study needs positive theta values");
    const std::size_t n_theta = theta_list.size();
    const double nu = spec.family == IncrementFamily::gaussian ? kGaussianNu : spec.nu;
    std::vector<double> drifts(n_theta);
    for (std::size_t t = 0; t < n_theta; ++t) drifts[t] = theta_list[t] * spec.sigma;
    IncrementSpec noise_spec = spec;
    noise_spec.c = 0.0;

    std::vector<EfficiencyReport> reports;
    for (const std::size_t n : n_list) {
        const InverseMap& slice = table.slice_for(n, nu);
        std::vector<double> r0(n_avg * n_theta), vanilla(n_avg * n_theta);
        const std::uint64_t stream =
            derive_seed(master_seed, StreamPurpose::efficiency, mix64(n) ^ std::bit_cast<std::uint64_t>(nu));
        parallel_for(n_avg, jobs, [&](std::size_t r) {
            const std::uint64_t seed = derive_seed(stream, StreamPurpose::series, r);
            std::vector<double> noise(n), buffer(n), shifted(n), sums(n_theta, 0.0);
            SplitMix64 rng(seed);
            draw_increments(noise_spec, rng, noise);
            for (std::size_t j = 0; j < permutations; ++j) {
                std::copy(noise.begin(), noise.end(), buffer.begin());
                SplitMix64 perm_rng(derive_seed(seed, StreamPurpose::permutation, j));
                shuffle(std::span<double>(buffer), perm_rng);
                accumulate_record_differences(buffer, drifts, sums);
            }
            for (std::size_t t = 0; t < n_theta; ++t) {
                r0[r * n_theta + t] = sums[t] / static_cast<double>(permutations);
                for (std::size_t k = 0; k < n; ++k) shifted[k] = noise[k] + drifts[t];
                vanilla[r * n_theta + t] = vanilla_sharpe(shifted);
            }
        });
        for (std::size_t t = 0; t < n_theta; ++t) {
            const auto moments = [&](const std::vector<double>& v) {
                CompensatedSum s;
                for (std::size_t r = 0; r < n_avg; ++r) s.add(v[r * n_theta + t]);
                const double mean = s.value() / static_cast<double>(n_avg);
                CompensatedSum ss;
                for (std::size_t r = 0; r < n_avg; ++r) {
                    const double d = v[r * n_theta + t] - mean;
                    ss.add(d * d);
                }
                return std::pair{mean, ss.value() / static_cast<double>(n_avg - 1)};
            };
            EfficiencyReport rep;
            rep.n = n;
            rep.nu = nu;
            rep.theta_true = theta_list[t];
            std::tie(rep.mean_r0, rep.var_r0) = moments(r0);
            std::tie(rep.mean_vanilla, rep.sigma_s2) = moments(vanilla);
            rep.derivative = slice.derivative(theta_list[t]);
            rep.usable = rep.derivative > 1e-9 * static_cast<double>(n) && theta_list[t] <= slice.theta_max();
            rep.sigma_r2 = rep.usable ? rep.var_r0 / (rep.derivative * rep.derivative) : 0.0;
            rep.rho = rep.usable && rep.sigma_r2 > 0.0 ? rep.sigma_s2 / rep.sigma_r2 : 0.0;
            reports.push_back(rep);
        }
    }
    return reports;
}

} // namespace recsharpe
