#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "recsharpe/seeding.hpp"
#include "recsharpe/series.hpp"

namespace recsharpe {

inline constexpr double kGaussianNu = std::numeric_limits<double>::infinity();

enum class IncrementFamily { gaussian, student };

// Law of one synthetic increment: drift c plus a zero-mean draw of standard
// deviation sigma. Student draws use nu degrees of freedom rescaled so the
// variance is sigma^2 (the t scale parameter is sigma * sqrt((nu - 2) / nu)).
struct IncrementSpec {
    IncrementFamily family = IncrementFamily::gaussian;
    double nu = kGaussianNu;
    double sigma = 1.0;
    double c = 0.0;

    static IncrementSpec gaussian(double sigma = 1.0, double c = 0.0);
    static IncrementSpec student(double nu, double sigma = 1.0, double c = 0.0);
    // nu = +inf selects the Gaussian family.
    static IncrementSpec from_nu(double nu, double sigma = 1.0, double c = 0.0);

    void validate() const;
    double t_scale() const noexcept;
};

// Fills `out` with i.i.d. increments. A fresh distribution object is used per
// call so the values depend only on the generator state.
void draw_increments(const IncrementSpec& spec, SplitMix64& rng, std::span<double> out);

ReturnSeries generate_series(const IncrementSpec& spec, std::size_t n, std::uint64_t seed);

// Grid of (n, theta = c / sigma, nu) triples. nu = +inf is the Gaussian slice.
struct SurfaceGrid {
    std::vector<std::size_t> n;
    std::vector<double> theta;
    std::vector<double> nu;
};

// Scaled-down default: nu in {2.5, 3, 4, 5, 7, 10} plus the Gaussian slice,
// n in {20, 50, 100, 252, 504}, 15 geometric theta in [0.001, 1].
SurfaceGrid desk_scale_grid();
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

struct SurfaceRow {
    std::size_t n = 0;
    double theta = 0.0;
    double nu = kGaussianNu;
    std::size_t n_avg = 0;
    std::size_t permutations = 0;
    double mean_r0 = 0.0;
    double stderr_r0 = 0.0;
};

// Mean R_0 for every grid triple, rows ordered by (n, nu, theta).
struct Surface {
    SurfaceGrid grid;
    std::size_t n_avg = 0;
    std::size_t permutations = 0;
    std::uint64_t master_seed = 0;
    std::vector<SurfaceRow> rows;

    const SurfaceRow& at(std::size_t i_n, std::size_t i_nu, std::size_t i_theta) const;
};

struct SurfaceOptions {
    std::size_t jobs = 0;
    // Element operations (shuffled steps times drifts); the desk grid is ~1.1e12.
    double work_budget = 2e12;
    bool force = false;
};

double estimate_surface_work(const SurfaceGrid& grid, std::size_t n_avg, std::size_t permutations);

// Seed of replica r of slice (n, nu). Its permutations use
// derive_seed(result, permutation, j), the same convention as r0_statistic.
std::uint64_t surface_replica_seed(std::uint64_t master_seed, std::size_t n, double nu,
                                   std::size_t replica);

// For each (n, nu) slice, draws n_avg unit-variance noise series and evaluates
// R_0 of noise + theta for every theta on the same draws and the same shuffles
// (common random numbers across theta). sigma = 1 since records are scale free.
Surface mean_r0_surface(const SurfaceGrid& grid, std::size_t n_avg, std::size_t permutations,
                        std::uint64_t master_seed, const SurfaceOptions& options = {});

// Columns: n,theta,nu,n_avg,permutations,mean_r0,stderr_r0 (nu = inf for Gaussian).
void write_surface_csv(std::ostream& out, const Surface& surface);

} // namespace recsharpe
