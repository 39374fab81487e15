#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recsharpe/calibration.hpp"
#include "recsharpe/records.hpp"
#include "recsharpe/series.hpp"
#include "recsharpe/student_fit.hpp"
#include "recsharpe/synthetic.hpp"

namespace recsharpe {

inline constexpr std::size_t kMinEstimateLength = 20;
inline constexpr double kDefaultPeriodsPerYear = 252.0;
// Lower edge of the calibrated nu range; smaller fitted values are clamped.
inline constexpr double kMinCalibratedNu = 2.5;

enum class EstimationMethod { table_inverse, simplified, vanilla };

const char* to_string(EstimationMethod method) noexcept;
EstimationMethod parse_method(const std::string& text);

// Sample mean over sample standard deviation (n - 1 denominator), no bias
// correction. Throws NumericError on zero variance.
double vanilla_sharpe(std::span<const double> returns);

struct EstimateDiagnostics {
    // Machine-readable event tags, e.g. "boundary", "nu_clamped_low".
    std::vector<std::string> flags;
    std::uint64_t seed = 0;
    std::size_t permutations = 0;

    bool has(const std::string& flag) const;
    void add(const std::string& flag);
};

struct SharpeEstimate {
    double theta = 0.0;
    std::optional<double> theta_annualized;
    double nu_hat = kNuFitMax;
    bool nu_gaussian = true;
    double r0 = 0.0;
    std::size_t n = 0;
    EstimationMethod method = EstimationMethod::simplified;
    EstimateDiagnostics diagnostics;
};

struct EstimateOptions {
    EstimationMethod method = EstimationMethod::simplified;
    std::size_t permutations = kDefaultPermutations;
    std::uint64_t seed = 0;
    // Annualize by sqrt(periods_per_year); nullopt disables.
    std::optional<double> periods_per_year = kDefaultPeriodsPerYear;
    // Skip the Student fit and use this nu (+inf = Gaussian).
    std::optional<double> nu_override;
};

// Moment-free estimate: R_0 from permutations, nu from the Student fit, then
// either the simplified curve a(|R_0|/n) (1 - 8/3 nu^{-3/2}) sign(R_0) or
// the table inverse blended across the n and nu grids.
SharpeEstimate estimate_sharpe(const ReturnSeries& series, const CalibrationTable& table,
                               const EstimateOptions& options = {});

// The mapping step alone, for a given R_0, n and nu (+inf = Gaussian).
double theta_from_r0(const CalibrationTable& table, double r0, std::size_t n, double nu, EstimationMethod method,
                     EstimateDiagnostics& diagnostics);

// Correction factor 1 - (8/3) nu^{-3/2}; 1 for the Gaussian limit.
double heavy_tail_factor(double nu) noexcept;

struct EfficiencyReport {
    std::size_t n = 0;
    double nu = kGaussianNu;
    double theta_true = 0.0;
    double mean_r0 = 0.0;
    double var_r0 = 0.0;
    double derivative = 0.0; // dE(R_0)/dtheta from the calibration slice
    double mean_vanilla = 0.0;
    double sigma_s2 = 0.0;   // variance of vanilla estimates
    double sigma_r2 = 0.0;   // delta-method variance of the record estimate
    double rho = 0.0;        // sigma_s2 / sigma_r2
    bool usable = true;
};

// Relative efficiency of the record estimator against the vanilla one by the
// delta method. For each n and replica one noise series is drawn; every theta
// reuses it (drift c = theta * sigma) together with the same shuffles.
// Requires the (n, spec.nu) slice in the table.
std::vector<EfficiencyReport> efficiency_study(const IncrementSpec& spec, std::span<const std::size_t> n_list,
                                               std::span<const double> theta_list, std::size_t n_avg,
                                               std::size_t permutations, std::uint64_t master_seed,
                                               const CalibrationTable& table, std::size_t jobs = 0);

} // namespace recsharpe
