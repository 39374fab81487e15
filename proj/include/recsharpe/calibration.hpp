#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recsharpe/interpolation.hpp"
#include "recsharpe/synthetic.hpp"

namespace recsharpe {

inline constexpr int kTableFormatVersion = 1;
inline constexpr std::size_t kMinThetaPoints = 4;
inline constexpr std::size_t kMinNuPoints = 4;
inline constexpr double kFitMaxPValue = 0.01;
inline constexpr double kFitMaxMeanSquaredResidual = 0.1;
inline constexpr double kCurveRounding = 0.01;

struct InverseLookup {
    double theta = 0.0;
    // |r0| beyond the calibrated range; theta pinned to +-theta_max.
    bool clamped = false;
};

// theta <-> E(R_0) for one (n, nu) slice. The mean surface is made monotone by
// weighted isotonic regression, anchored at (0, 0) and interpolated with a
// monotone cubic. Negative arguments use the odd extension F(-x) = -F(x).
class InverseMap {
public:
    InverseMap(std::size_t n, double nu, std::span<const double> theta, std::span<const double> mean_r0,
               std::span<const double> stderr_r0);

    std::size_t n() const noexcept { return n_; }
    double nu() const noexcept { return nu_; }
    double theta_max() const { return curve_.x_max(); }
    double r0_max() const { return curve_.y_max(); }

    double expected_r0(double theta) const;
    // dE(R_0)/dtheta from the interpolant's analytic derivative.
    double derivative(double theta) const;
    InverseLookup theta_for(double r0) const;

    const MonotoneCubic& curve() const noexcept { return curve_; }

private:
    std::size_t n_;
    double nu_;
    MonotoneCubic curve_;
};

// Least-squares fit theta(nu) = a - b nu^{-3/2} at fixed (R_0, n).
struct FitRecord {
    double r0 = 0.0;
    std::size_t n = 0;
    double a = 0.0;
    double b = 0.0;
    double p_value_b = 1.0;
    double mean_sq_residual = 0.0;
    // Some slice clamped at theta_max; such fits are never accepted.
    bool clamped = false;
    bool accepted = false;
};

// Pure regression part: inputs are finite nu values and the matching theta.
// accepted <=> p_value_b <= 0.01 and mean_sq_residual <= 0.1.
FitRecord fit_nu_dependence(std::span<const double> nu, std::span<const double> theta);

// Single-curve estimator a(R_0 / n): accepted fits grouped by R_0/n rounded to
// 0.01, group means made non-decreasing, anchored at (0, 0), interpolated.
struct SimplifiedCurve {
    std::vector<std::pair<double, double>> groups; // (r, mean a), anchor first
    double b_over_a_slope = 0.0;                    // b ~ slope * a over a < 1
    std::size_t fits_used = 0;
    MonotoneCubic curve;

    // a(r) for r >= 0; values beyond the last group are held and flagged.
    double a(double r, bool* clamped = nullptr) const;
    double r_max() const { return curve.x_max(); }
};

struct SimplifiedCurveOptions {
    std::size_t min_n = 100;
    std::size_t min_fits = 50;
    // Coverage: first group at or below, last group at or above, no gap wider.
    double max_first_r = 0.1;
    double min_last_r = 0.8;
    double max_gap = 0.1;
};

// Builds the curve from groups alone (used on load and in tests).
SimplifiedCurve simplified_curve_from_groups(std::vector<std::pair<double, double>> groups,
                                             double b_over_a_slope, std::size_t fits_used);

// Throws NumericError naming the uncovered r range when coverage is short.
SimplifiedCurve build_simplified_curve(std::span<const FitRecord> fits, const SimplifiedCurveOptions& options = {});

struct Provenance {
    std::uint64_t master_seed = 0;
    std::size_t n_avg = 0;
    std::size_t permutations = 0;
    std::string built_at;
};

struct TableBuildOptions {
    SimplifiedCurveOptions curve;
    bool build_fits = true;
};

// Immutable calibration knowledge base. Safe for concurrent reads.
class CalibrationTable {
public:
    static CalibrationTable build(const Surface& surface, const TableBuildOptions& options = {},
                                  std::string built_at = {});

    const SurfaceGrid& grid() const noexcept { return grid_; }
    const Provenance& provenance() const noexcept { return provenance_; }
    const std::vector<SurfaceRow>& surface_rows() const noexcept { return rows_; }
    const std::vector<FitRecord>& fits() const noexcept { return fits_; }
    const std::optional<SimplifiedCurve>& simplified() const noexcept { return simplified_; }
    // Why the simplified curve is missing, if it is.
    const std::string& simplified_error() const noexcept { return simplified_error_; }

    std::optional<std::size_t> n_index(std::size_t n) const;
    std::optional<std::size_t> nu_index(double nu) const;
    const InverseMap& slice(std::size_t i_n, std::size_t i_nu) const;
    // Throws InputError when (n, nu) is not on the grid.
    const InverseMap& slice_for(std::size_t n, double nu) const;

    bool has_gaussian_slice() const;
    std::size_t n_min() const { return grid_.n.front(); }
    std::size_t n_max() const { return grid_.n.back(); }

    // Fit at (r0, n) against every finite-nu slice at grid size n.
    FitRecord fit_at(double r0, std::size_t n) const;

    // nu at which the fitted curve for r0_high falls to the Gaussian level
    // a(r0_low): solves a_high - b_high nu^{-3/2} = a_low. nullopt if no
    // finite positive solution.
    std::optional<double> rank_switch_nu(double r0_low, double r0_high, std::size_t n) const;

    // CRC-32 (hex) of the serialized payload; stable across save/load.
    std::string checksum() const;

    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static CalibrationTable load(std::istream& in);
    static CalibrationTable load(const std::string& path);

private:
    CalibrationTable() = default;
    void build_slices();
    std::string payload() const;

    SurfaceGrid grid_;
    Provenance provenance_;
    std::vector<SurfaceRow> rows_;
    std::vector<InverseMap> slices_;
    std::vector<FitRecord> fits_;
    std::optional<SimplifiedCurve> simplified_;
    std::string simplified_error_;
};

} // namespace recsharpe
