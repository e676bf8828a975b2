#pragma once

#include <cstddef>
#include <span>

namespace ballet {

/// Rank used by every empirical quantile in the library: the m-th smallest
/// value with m = ceil(q * n), clamped to [1, n].
std::size_t quantile_rank(double q, std::size_t n);

/// The ceil(q * n)-th smallest element of `values` (1-based rank).
double empirical_quantile(std::span<const double> values, double q);

/// The m-th smallest element (1-based).
double order_statistic(std::span<const double> values, std::size_t m);

}  // namespace ballet
