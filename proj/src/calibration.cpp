#include "recsharpe/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "recsharpe/errors.hpp"

namespace recsharpe {

namespace {

// Keeps a non-decreasing sequence strictly increasing so that it is invertible.
void make_strictly_increasing(std::vector<double>& y) {
    double scale = 1.0;
    for (const double v : y) scale = std::max(scale, std::abs(v));
    const double step = 1e-9 * scale;
    for (std::size_t i = 1; i < y.size(); ++i) y[i] = std::max(y[i], y[i - 1] + step);
}

} // namespace

InverseMap::InverseMap(std::size_t n, double nu, std::span<const double> theta, std::span<const double> mean_r0,
                       std::span<const double> stderr_r0)
    : n_(n), nu_(nu) {
    if (theta.size() != mean_r0.size() || theta.size() != stderr_r0.size())
        throw InputError("inverse map inputs differ in length");
    std::vector<double> x{0.0}, y{0.0}, w{1e18};
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (theta[i] <= 0.0) continue; // the symmetric anchor replaces any theta = 0 row
        x.push_back(theta[i]);
        y.push_back(mean_r0[i]);
        const double se = std::max(stderr_r0[i], 1e-6);
        w.push_back(1.0 / (se * se));
    }
    if (x.size() - 1 < kMinThetaPoints)
        throw InputError("inverse map needs at least " + std::to_string(kMinThetaPoints) + " positive theta points");
    auto iso = isotonic_regression(y, w);
    iso[0] = 0.0;
    make_strictly_increasing(iso);
    curve_ = MonotoneCubic(std::move(x), std::move(iso));
}

double InverseMap::expected_r0(double theta) const {
    return theta < 0.0 ? -curve_.value(-theta) : curve_.value(theta);
}

double InverseMap::derivative(double theta) const { return curve_.derivative(std::abs(theta)); }

InverseLookup InverseMap::theta_for(double r0) const {
    const double magnitude = std::abs(r0);
    InverseLookup out;
    out.clamped = magnitude > curve_.y_max();
    out.theta = curve_.inverse(magnitude);
    if (r0 < 0.0) out.theta = -out.theta;
    return out;
}

FitRecord fit_nu_dependence(std::span<const double> nu, std::span<const double> theta) {
    if (nu.size() != theta.size()) throw InputError("nu and theta lists differ in length");
    const std::size_t k = nu.size();
    std::vector<double> x(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(nu[i] > 0.0) || !std::isfinite(nu[i])) throw InputError("fit needs finite positive nu values");
        x[i] = std::pow(nu[i], -1.5);
    }
    if (k < kMinNuPoints) throw InputError("fit_nu_dependence needs at least 4 nu values");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += x[i];
        my += theta[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (theta[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericError("degenerate design: all nu values equal");
    const double slope = sxy / sxx;
    FitRecord fit;
    fit.a = my - slope * mx;
    fit.b = -slope;
    double ssr = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = theta[i] - (fit.a + slope * x[i]);
        ssr += r * r;
    }
    fit.mean_sq_residual = ssr / static_cast<double>(k);
    const double dof = static_cast<double>(k - 2);
    const double se = std::sqrt(ssr / dof / sxx);
    if (se > 0.0) {
        const boost::math::students_t dist(dof);
        fit.p_value_b = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(slope) / se));
    } else {
        fit.p_value_b = slope == 0.0 ? 1.0 : 0.0;
    }
    fit.accepted = fit.p_value_b <= kFitMaxPValue && fit.mean_sq_residual <= kFitMaxMeanSquaredResidual;
    return fit;
}

double SimplifiedCurve::a(double r, bool* clamped) const {
    const double magnitude = std::abs(r);
    if (clamped) *clamped = magnitude > curve.x_max();
    const double value = curve.value(magnitude);
    return r < 0.0 ? -value : value;
}

SimplifiedCurve simplified_curve_from_groups(std::vector<std::pair<double, double>> groups, double b_over_a_slope,
                                             std::size_t fits_used) {
    if (groups.size() < 2) throw NumericError("simplified curve needs at least one group besides the anchor");
    std::vector<double> x, y;
    for (const auto& [r, a] : groups) {
        x.push_back(r);
        y.push_back(a);
    }
    SimplifiedCurve out;
    out.groups = std::move(groups);
    out.b_over_a_slope = b_over_a_slope;
    out.fits_used = fits_used;
    out.curve = MonotoneCubic(std::move(x), std::move(y));
    return out;
}

SimplifiedCurve build_simplified_curve(std::span<const FitRecord> fits, const SimplifiedCurveOptions& options) {
    std::map<long, std::pair<double, std::size_t>> by_r; // key = round(r / 0.01)
    double sab = 0.0, saa = 0.0;
    std::size_t used = 0;
    for (const auto& fit : fits) {
        if (!fit.accepted || fit.n < options.min_n) continue;
        const long key = std::lround(fit.r0 / static_cast<double>(fit.n) / kCurveRounding);
        auto& slot = by_r[key];
        slot.first += fit.a;
        slot.second += 1;
        ++used;
        if (fit.a < 1.0) {
            sab += fit.a * fit.b;
            saa += fit.a * fit.a;
        }
    }
    if (used < options.min_fits)
        throw NumericError("simplified curve needs at least " + std::to_string(options.min_fits) +
                           " accepted fits with n >= " + std::to_string(options.min_n) + ", got " +
                           std::to_string(used));

    std::vector<double> r, a, w;
    for (const auto& [key, slot] : by_r) {
        if (key <= 0) continue; // the (0, 0) anchor owns r = 0
        r.push_back(static_cast<double>(key) * kCurveRounding);
        a.push_back(slot.first / static_cast<double>(slot.second));
        w.push_back(static_cast<double>(slot.second));
    }
    std::ostringstream gaps;
    if (r.empty() || r.front() > options.max_first_r)
        gaps << " [0, " << (r.empty() ? 1.0 : r.front()) << ")";
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i] - r[i - 1] > options.max_gap + 1e-12) gaps << " (" << r[i - 1] << ", " << r[i] << ")";
    if (!r.empty() && r.back() < options.min_last_r) gaps << " (" << r.back() << ", " << options.min_last_r << "]";
    if (!gaps.str().empty()) throw NumericError("simplified curve lacks coverage of r = R0/n in" + gaps.str());

    // Anchor plus groups, projected onto non-decreasing sequences.
    r.insert(r.begin(), 0.0);
    a.insert(a.begin(), 0.0);
    w.insert(w.begin(), 1e18);
    auto iso = isotonic_regression(a, w);
    iso[0] = 0.0;
    make_strictly_increasing(iso);
    std::vector<std::pair<double, double>> groups;
    for (std::size_t i = 0; i < r.size(); ++i) groups.emplace_back(r[i], iso[i]);
    return simplified_curve_from_groups(std::move(groups), saa > 0.0 ? sab / saa : 0.0, used);
}

CalibrationTable CalibrationTable::build(const Surface& surface, const TableBuildOptions& options,
                                         std::string built_at) {
    CalibrationTable table;
    table.grid_ = surface.grid;
    table.rows_ = surface.rows;
    table.provenance_ = Provenance{surface.master_seed, surface.n_avg, surface.permutations, std::move(built_at)};
    if (table.rows_.size() != table.grid_.n.size() * table.grid_.nu.size() * table.grid_.theta.size())
        throw InputError("surface rows do not match its grid");
    for (std::size_t i = 1; i < table.grid_.n.size(); ++i)
        if (table.grid_.n[i] <= table.grid_.n[i - 1]) throw InputError("table n grid must be strictly increasing");
    for (std::size_t i = 1; i < table.grid_.nu.size(); ++i)
        if (table.grid_.nu[i] <= table.grid_.nu[i - 1]) throw InputError("table nu grid must be strictly increasing");
    table.build_slices();

    std::size_t finite_nu = 0;
    for (const double nu : table.grid_.nu) finite_nu += std::isfinite(nu) ? 1 : 0;
    if (options.build_fits && finite_nu >= kMinNuPoints) {
        for (const std::size_t n : table.grid_.n)
            for (std::size_t r0 = 1; r0 <= n; ++r0) table.fits_.push_back(table.fit_at(static_cast<double>(r0), n));
        try {
            table.simplified_ = build_simplified_curve(table.fits_, options.curve);
        } catch (const NumericError& e) {
            table.simplified_error_ = e.what();
        }
    } else {
        table.simplified_error_ = "fits not built";
    }
    return table;
}

void CalibrationTable::build_slices() {
    slices_.clear();
    const std::size_t n_theta = grid_.theta.size();
    std::vector<double> mean(n_theta), se(n_theta);
    for (std::size_t i_n = 0; i_n < grid_.n.size(); ++i_n) {
        for (std::size_t i_nu = 0; i_nu < grid_.nu.size(); ++i_nu) {
            for (std::size_t t = 0; t < n_theta; ++t) {
                const auto& row = rows_[(i_n * grid_.nu.size() + i_nu) * n_theta + t];
                mean[t] = row.mean_r0;
                se[t] = row.stderr_r0;
            }
            slices_.emplace_back(grid_.n[i_n], grid_.nu[i_nu], grid_.theta, mean, se);
        }
    }
}

std::optional<std::size_t> CalibrationTable::n_index(std::size_t n) const {
    const auto it = std::find(grid_.n.begin(), grid_.n.end(), n);
    if (it == grid_.n.end()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(grid_.n.begin(), it));
}

std::optional<std::size_t> CalibrationTable::nu_index(double nu) const {
    for (std::size_t i = 0; i < grid_.nu.size(); ++i)
        if (grid_.nu[i] == nu) return i;
    return std::nullopt;
}

const InverseMap& CalibrationTable::slice(std::size_t i_n, std::size_t i_nu) const {
    return slices_.at(i_n * grid_.nu.size() + i_nu);
}

const InverseMap& CalibrationTable::slice_for(std::size_t n, double nu) const {
    const auto i_n = n_index(n);
    const auto i_nu = nu_index(nu);
    if (!i_n || !i_nu)
        throw InputError("no calibration slice for n = " + std::to_string(n) + ", nu = " + std::to_string(nu));
    return slice(*i_n, *i_nu);
}

bool CalibrationTable::has_gaussian_slice() const { return std::isinf(grid_.nu.back()); }

FitRecord CalibrationTable::fit_at(double r0, std::size_t n) const {
    const auto i_n = n_index(n);
    if (!i_n) throw InputError("fit_at: n = " + std::to_string(n) + " is not on the table grid");
    std::vector<double> nus, thetas;
    bool clamped = false;
    for (std::size_t i_nu = 0; i_nu < grid_.nu.size(); ++i_nu) {
        if (!std::isfinite(grid_.nu[i_nu])) continue;
        const auto lookup = slice(*i_n, i_nu).theta_for(r0);
        clamped = clamped || lookup.clamped;
        nus.push_back(grid_.nu[i_nu]);
        thetas.push_back(lookup.theta);
    }
    if (nus.size() < kMinNuPoints) throw NumericError("fit needs at least 4 finite nu slices");
    FitRecord fit = fit_nu_dependence(nus, thetas);
    fit.r0 = r0;
    fit.n = n;
    fit.clamped = clamped;
    fit.accepted = fit.accepted && !clamped;
    return fit;
}

std::optional<double> CalibrationTable::rank_switch_nu(double r0_low, double r0_high, std::size_t n) const {
    const FitRecord low = fit_at(r0_low, n);
    const FitRecord high = fit_at(r0_high, n);
    const double gap = high.a - low.a;
    if (!(gap > 0.0) || !(high.b > 0.0)) return std::nullopt;
    return std::pow(high.b / gap, 2.0 / 3.0);
}

} // namespace recsharpe
