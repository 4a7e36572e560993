#pragma once

#include <cstdint>

namespace safer {

/// P(X <= k) for X ~ Binomial(n, p).
///
/// Terms are formed in log space from a cached log-factorial table, shifted by
/// their maximum and summed with Kahan compensation; one exponentiation
/// recovers the result. Throws InvalidArgument unless 0 <= k <= n and
/// 0 <= p <= 1.
double binomial_cdf(std::int64_t k, std::int64_t n, double p);

/// Exact (Clopper-Pearson) one-sided upper confidence bound for a binomial
/// failure probability after observing k failures in n trials:
///
///   sup { R in [0,1] : P(Bin(n, R) <= k) >= delta }
///
/// Exactly 1 when k == n. Otherwise the root of the strictly decreasing map
/// R -> P(Bin(n, R) <= k) - delta, found by bisection.
double clopper_pearson_upper(std::int64_t k, std::int64_t n, double delta);

// Bisection controls.
inline constexpr double kBoundTolerance = 1e-10;
inline constexpr int kBoundMaxIterations = 200;

}  // namespace safer
