#include "recsharpe/synthetic.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "recsharpe/errors.hpp"
#include "recsharpe/parallel.hpp"
#include "recsharpe/records.hpp"

namespace recsharpe {

IncrementSpec IncrementSpec::gaussian(double sigma, double c) {
    IncrementSpec s{IncrementFamily::gaussian, kGaussianNu, sigma, c};
    s.validate();
    return s;
}

IncrementSpec IncrementSpec::student(double nu, double sigma, double c) {
    IncrementSpec s{IncrementFamily::student, nu, sigma, c};
    s.validate();
    return s;
}

IncrementSpec IncrementSpec::from_nu(double nu, double sigma, double c) {
    return std::isinf(nu) && nu > 0 ? gaussian(sigma, c) : student(nu, sigma, c);
}

void IncrementSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be positive and finite");
    if (!std::isfinite(c)) throw InputError("drift must be finite");
    if (family == IncrementFamily::student && !(nu > 2.0 && std::isfinite(nu)))
        throw InputError("student increments need finite nu > 2");
}

double IncrementSpec::t_scale() const noexcept {
    return family == IncrementFamily::student ? sigma * std::sqrt((nu - 2.0) / nu) : sigma;
}

void draw_increments(const IncrementSpec& spec, SplitMix64& rng, std::span<double> out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    if (spec.family == IncrementFamily::gaussian) {
        for (double& x : out) x = spec.sigma * normal(rng) + spec.c;
        return;
    }
    // t = Z / sqrt(V / nu) with V ~ chi2(nu) = Gamma(nu / 2, 2).
    std::gamma_distribution<double> chi2(spec.nu / 2.0, 2.0);
    const double scale = spec.t_scale();
    for (double& x : out) {
        const double z = normal(rng);
        const double v = chi2(rng);
        x = scale * (z / std::sqrt(v / spec.nu)) + spec.c;
    }
}

ReturnSeries generate_series(const IncrementSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw InputError("series length must be at least 1");
    std::vector<double> values(n);
    SplitMix64 rng(seed);
    draw_increments(spec, rng, values);
    return ReturnSeries(std::move(values));
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw InputError("bad geometric grid");
    std::vector<double> g(count);
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) g[i] = lo * std::exp(ratio * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

SurfaceGrid desk_scale_grid() {
    return SurfaceGrid{{20, 50, 100, 252, 504},
                       geometric_grid(0.001, 1.0, 15),
                       {2.5, 3.0, 4.0, 5.0, 7.0, 10.0, kGaussianNu}};
}

const SurfaceRow& Surface::at(std::size_t i_n, std::size_t i_nu, std::size_t i_theta) const {
    return rows.at((i_n * grid.nu.size() + i_nu) * grid.theta.size() + i_theta);
}

double estimate_surface_work(const SurfaceGrid& grid, std::size_t n_avg, std::size_t permutations) {
    double steps = 0.0;
    for (const std::size_t n : grid.n) steps += static_cast<double>(n);
    return steps * static_cast<double>(grid.nu.size()) * static_cast<double>(n_avg) *
           static_cast<double>(permutations) * static_cast<double>(grid.theta.size() + 1);
}

std::uint64_t surface_replica_seed(std::uint64_t master_seed, std::size_t n, double nu,
                                   std::size_t replica) {
    const std::uint64_t slice = mix64(static_cast<std::uint64_t>(n)) ^ std::bit_cast<std::uint64_t>(nu);
    return derive_seed(derive_seed(master_seed, StreamPurpose::surface, slice), StreamPurpose::series,
                       replica);
}

namespace {

void validate_grid(const SurfaceGrid& grid) {
    if (grid.n.empty() || grid.theta.empty() || grid.nu.empty()) throw InputError("surface grid has an empty axis");
    for (const std::size_t n : grid.n)
        if (n < 2) throw InputError("surface grid needs n >= 2");
    for (std::size_t i = 0; i < grid.theta.size(); ++i) {
        if (!(grid.theta[i] >= 0.0) || !std::isfinite(grid.theta[i])) throw InputError("theta must be finite and >= 0");
        if (i > 0 && !(grid.theta[i] > grid.theta[i - 1])) throw InputError("theta grid must be strictly increasing");
    }
    for (const double nu : grid.nu) IncrementSpec::from_nu(nu);
}

} // namespace

Surface mean_r0_surface(const SurfaceGrid& grid, std::size_t n_avg, std::size_t permutations,
                        std::uint64_t master_seed, const SurfaceOptions& options) {
    validate_grid(grid);
    if (n_avg < 2) throw InputError("n_avg must be at least 2");
    if (permutations == 0) throw InputError("permutations must be at least 1");
    const double work = estimate_surface_work(grid, n_avg, permutations);
    if (work > options.work_budget && !options.force) {
        std::ostringstream msg;
        msg << "surface needs ~" << work << " element operations, budget is " << options.work_budget
            << " (use force to override)";
        throw BudgetError(msg.str());
    }

    const std::size_t n_theta = grid.theta.size();
    const std::size_t n_slices = grid.n.size() * grid.nu.size();
    constexpr std::size_t kChunk = 32;
    const std::size_t chunks_per_slice = (n_avg + kChunk - 1) / kChunk;

    // replica_r0[slice][replica * n_theta + t]
    std::vector<std::vector<double>> replica_r0(n_slices, std::vector<double>(n_avg * n_theta));

    parallel_for(n_slices * chunks_per_slice, options.jobs, [&](std::size_t task) {
        const std::size_t slice = task / chunks_per_slice;
        const std::size_t chunk = task % chunks_per_slice;
        const std::size_t n = grid.n[slice / grid.nu.size()];
        const double nu = grid.nu[slice % grid.nu.size()];
        const IncrementSpec spec = IncrementSpec::from_nu(nu);
        std::vector<double> noise(n), buffer(n), sums(n_theta);
        const std::size_t end = std::min(n_avg, (chunk + 1) * kChunk);
        for (std::size_t r = chunk * kChunk; r < end; ++r) {
            const std::uint64_t seed = surface_replica_seed(master_seed, n, nu, r);
            SplitMix64 rng(seed);
            draw_increments(spec, rng, noise);
            std::fill(sums.begin(), sums.end(), 0.0);
            for (std::size_t j = 0; j < permutations; ++j) {
                std::copy(noise.begin(), noise.end(), buffer.begin());
                SplitMix64 perm_rng(derive_seed(seed, StreamPurpose::permutation, j));
                shuffle(std::span<double>(buffer), perm_rng);
                accumulate_record_differences(buffer, grid.theta, sums);
            }
            double* dst = replica_r0[slice].data() + r * n_theta;
            for (std::size_t t = 0; t < n_theta; ++t) dst[t] = sums[t] / static_cast<double>(permutations);
        }
    });

    Surface surface{grid, n_avg, permutations, master_seed, {}};
    surface.rows.reserve(n_slices * n_theta);
    for (std::size_t slice = 0; slice < n_slices; ++slice) {
        for (std::size_t t = 0; t < n_theta; ++t) {
            CompensatedSum sum, sum_sq;
            for (std::size_t r = 0; r < n_avg; ++r) sum.add(replica_r0[slice][r * n_theta + t]);
            const double mean = sum.value() / static_cast<double>(n_avg);
            for (std::size_t r = 0; r < n_avg; ++r) {
                const double d = replica_r0[slice][r * n_theta + t] - mean;
                sum_sq.add(d * d);
            }
            const double var = sum_sq.value() / static_cast<double>(n_avg - 1);
            surface.rows.push_back(SurfaceRow{grid.n[slice / grid.nu.size()], grid.theta[t],
                                              grid.nu[slice % grid.nu.size()], n_avg, permutations, mean,
                                              std::sqrt(var / static_cast<double>(n_avg))});
        }
    }
    return surface;
}

void write_surface_csv(std::ostream& out, const Surface& surface) {
    out << "n,theta,nu,n_avg,permutations,mean_r0,stderr_r0\n";
    out << std::setprecision(17);
    for (const auto& row : surface.rows) {
        out << row.n << ',' << row.theta << ',';
        if (std::isinf(row.nu))
            out << "inf";
        else
            out << row.nu;
        out << ',' << row.n_avg << ',' << row.permutations << ',' << row.mean_r0 << ',' << row.stderr_r0
            << '\n';
    }
}

} // namespace recsharpe
