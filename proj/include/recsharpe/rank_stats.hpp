#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace recsharpe {

// Ranks 1..n with rank 1 the largest value; ties broken by index (earlier
// first), so the result is always a permutation.
std::vector<std::size_t> descending_ranks(std::span<const double> values);

// Average ranks (ties share the mean rank), ascending order.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rho on average ranks. NaN when either side is constant or n < 2.
double spearman(std::span<const double> x, std::span<const double> y);

// Kendall tau-b. NaN when either side is constant or n < 2.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Symmetrized Blest coefficient (Genest and Plante 2003): the average of
// Blest's measure and its dual, symmetric in its two arguments. Ties are
// broken by index.
double symmetric_blest(std::span<const double> x, std::span<const double> y);

// Indices of the k largest (top) or smallest (bottom) values; ties broken by
// index order.
std::vector<std::size_t> top_k(std::span<const double> values, std::size_t k);
std::vector<std::size_t> bottom_k(std::span<const double> values, std::size_t k);

// |a intersect b| / k for two index sets of equal size k.
double overlap_fraction(std::span<const std::size_t> a, std::span<const std::size_t> b);

} // namespace recsharpe
