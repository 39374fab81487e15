#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "recsharpe/series.hpp"

namespace recsharpe {

inline constexpr std::size_t kDefaultPermutations = 1000;
inline constexpr std::size_t kExhaustiveMaxLength = 8;

// Upper/lower record counts and the matching total drawdown/drawup durations
// of one path with n steps. S_0 counts as the first record of both kinds and
// a record needs a strict new extremum, so r_plus + t_minus == n + 1 and
// r_minus + t_plus == n + 1.
struct RecordSummary {
    std::size_t r_plus = 0;
    std::size_t r_minus = 0;
    std::size_t t_minus = 0;
    std::size_t t_plus = 0;
    std::size_t n = 0;
    // Permutation average of r_plus - r_minus; set by r0_statistic only.
    std::optional<double> r0;
    std::size_t num_permutations = 0;
    std::uint64_t master_seed = 0;
};

RecordSummary count_records(const PricePath& path);

// Same counts straight from returns, without materializing the path.
RecordSummary count_records(std::span<const double> returns);

// R_+ - R_- of the path cumulated from `returns` with a constant added to
// every step. Hot loop of every Monte Carlo driver.
long record_difference(std::span<const double> returns, double drift = 0.0) noexcept;

// For each drift d_j, adds R_+ - R_- of cumsum(increments + d_j) to out[j].
// Equivalent to calling record_difference per drift, evaluated in one pass.
void accumulate_record_differences(std::span<const double> increments,
                                   std::span<const double> drifts,
                                   std::span<double> out) noexcept;

// Upper and lower record counts at every prefix length k = 1..n of one path.
// out_plus[k-1], out_minus[k-1] hold the counts after k steps.
void prefix_record_counts(std::span<const double> returns, std::span<std::uint32_t> out_plus,
                          std::span<std::uint32_t> out_minus) noexcept;

// Permutation-averaged R_0 over `num_permutations` uniform shuffles. Shuffle j
// is seeded from derive_seed(master_seed, permutation, j), so the result is a
// pure function of the arguments and independent of evaluation order.
RecordSummary r0_statistic(const ReturnSeries& series,
                           std::size_t num_permutations = kDefaultPermutations,
                           std::uint64_t master_seed = 0);

// Same statistic on a raw span (no ingestion checks beyond length).
double r0_mean(std::span<const double> returns, std::size_t num_permutations,
               std::uint64_t master_seed);

// Exact average of R_+ - R_- over all n! orderings. Distinct orderings of a
// multiset are enumerated once and weighted by their multiplicity.
double exhaustive_r0(std::span<const double> returns, std::size_t max_length = kExhaustiveMaxLength);

} // namespace recsharpe
