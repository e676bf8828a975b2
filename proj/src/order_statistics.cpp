#include "ballet/order_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ballet/errors.hpp"

namespace ballet {

std::size_t quantile_rank(double q, std::size_t n) {
  if (n == 0) throw ConfigError("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level outside [0, 1]");
  // The small slack keeps products such as 0.9 * 4000 from rounding up a rank.
  const double raw = std::ceil(q * static_cast<double>(n) - 1e-9);
  const auto m = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(m, n);
}

double order_statistic(std::span<const double> values, std::size_t m) {
  if (values.empty()) throw ConfigError("order statistic of an empty set");
  if (m < 1 || m > values.size()) throw ConfigError("order statistic rank out of range");
  std::vector<double> copy(values.begin(), values.end());
  auto nth = copy.begin() + static_cast<std::ptrdiff_t>(m - 1);
  std::nth_element(copy.begin(), nth, copy.end());
  return *nth;
}

double empirical_quantile(std::span<const double> values, double q) {
  return order_statistic(values, quantile_rank(q, values.size()));
}

}  // namespace ballet
