#include "safer/exact_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "safer/records.hpp"

namespace safer {
namespace {

// log(i!) for i <= n. The table grows on demand and is per-thread.
double log_factorial(std::int64_t n) {
  thread_local std::vector<double> table{0.0};
  if (static_cast<std::size_t>(n) >= table.size()) {
    const std::size_t old = table.size();
    table.resize(static_cast<std::size_t>(n) + 1);
    for (std::size_t i = old; i < table.size(); ++i)
      table[i] = boost::math::lgamma(static_cast<double>(i) + 1.0);
  }
  return table[static_cast<std::size_t>(n)];
}

void check_counts(std::int64_t k, std::int64_t n) {
  if (n < 0 || k < 0 || k > n) {
    throw InvalidArgument("binomial: need 0 <= k <= n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
  }
}

}  // namespace

double binomial_cdf(std::int64_t k, std::int64_t n, double p) {
  check_counts(k, n);
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("binomial_cdf: p must lie in [0,1]");
  if (k == n || p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = log_factorial(n);

  std::vector<double> terms(static_cast<std::size_t>(k) + 1);
  double peak = -INFINITY;
  for (std::int64_t j = 0; j <= k; ++j) {
    const double t = log_n_fact - log_factorial(j) - log_factorial(n - j) +
                     static_cast<double>(j) * log_p +
                     static_cast<double>(n - j) * log_q;
    terms[static_cast<std::size_t>(j)] = t;
    peak = std::max(peak, t);
  }

  double sum = 0.0;
  double carry = 0.0;
  for (double t : terms) {
    const double y = std::exp(t - peak) - carry;
    const double next = sum + y;
    carry = (next - sum) - y;
    sum = next;
  }
  return std::clamp(std::exp(peak + std::log(sum)), 0.0, 1.0);
}

double clopper_pearson_upper(std::int64_t k, std::int64_t n, double delta) {
  check_counts(k, n);
  if (n == 0) throw InvalidArgument("clopper_pearson_upper: n must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("clopper_pearson_upper: delta must lie in (0,1)");
  if (k == n) return 1.0;

  // cdf(lo) >= delta > cdf(hi) throughout.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < kBoundMaxIterations && hi - lo > kBoundTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_cdf(k, n, mid) >= delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace safer
