// Copyright 2026 The Hyperberry Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Saddle-point evaluation of binomial and hypergeometric log-probabilities
// (C. Loader, "Fast and accurate computation of binomial probabilities",
// 2000). Relative accuracy is a few ulps independent of the population size,
// which is what lets the log-space backend anchor at N up to 1e9 without a
// factorial table.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace hyperberry::detail {

/// log m! - [log sqrt(2 pi) - m + (m + 1/2) log m] for integer m >= 1.
inline double stirling_remainder(std::int64_t m) {
  static const std::array<double, 17> small = [] {
    std::array<double, 17> table{};
    long double log_factorial = 0.0L;
    const long double half_log_two_pi =
        0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
    for (int i = 1; i < 17; ++i) {
      log_factorial += std::log(static_cast<long double>(i));
      const long double li = static_cast<long double>(i);
      table[i] = static_cast<double>(log_factorial -
                                     (half_log_two_pi - li + (li + 0.5L) * std::log(li)));
    }
    return table;
  }();
  if (m < 17) return small[static_cast<std::size_t>(m)];

  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double x = static_cast<double>(m);
  const double xx = x * x;
  if (m > 500) return (s0 - s1 / xx) / x;
  if (m > 80) return (s0 - (s1 - s2 / xx) / xx) / x;
  if (m > 35) return (s0 - (s1 - (s2 - s3 / xx) / xx) / xx) / x;
  return (s0 - (s1 - (s2 - (s3 - s4 / xx) / xx) / xx) / xx) / x;
}

/// Deviance term x log(x / mu) + mu - x, stable when x is close to mu.
inline double binomial_deviance(double x, double mu) {
  if (std::abs(x - mu) < 0.1 * (x + mu)) {
    double v = (x - mu) / (x + mu);
    double sum = (x - mu) * v;
    double term = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      term *= v;
      const double next = sum + term / (2 * j + 1);
      if (next == sum) return next;
      sum = next;
    }
    return sum;
  }
  return x * std::log(x / mu) + mu - x;
}

/// log of C(size, x) p^x q^(size - x) with q = 1 - p passed explicitly.
inline double log_binomial_pmf(std::int64_t x, std::int64_t size, double p,
                               double q) {
  if (x < 0 || x > size) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(size);
  if (x == 0) {
    if (size == 0) return 0.0;
    return p < 0.1 ? -binomial_deviance(n, n * q) - n * p : n * std::log(q);
  }
  if (x == size) {
    return q < 0.1 ? -binomial_deviance(n, n * p) - n * q : n * std::log(p);
  }
  const double xd = static_cast<double>(x);
  const double lc = stirling_remainder(size) - stirling_remainder(x) -
                    stirling_remainder(size - x) - binomial_deviance(xd, n * p) -
                    binomial_deviance(n - xd, n * q);
  const double lf = std::log(2.0 * std::numbers::pi) + std::log(xd) +
                    std::log1p(-xd / n);
  return lc - 0.5 * lf;
}

/// log P(X = k) for X ~ Hyp(n; M, N). Returns -inf outside the support.
inline double log_hypergeometric_pmf(std::int64_t k, std::int64_t n,
                                     std::int64_t M, std::int64_t N) {
  const std::int64_t lo = n > N - M ? n - (N - M) : 0;
  const std::int64_t hi = n < M ? n : M;
  if (k < lo || k > hi) return -std::numeric_limits<double>::infinity();
  const double p = static_cast<double>(n) / static_cast<double>(N);
  const double q = static_cast<double>(N - n) / static_cast<double>(N);
  return log_binomial_pmf(k, M, p, q) + log_binomial_pmf(n - k, N - M, p, q) -
         log_binomial_pmf(n, N, p, q);
}

}  // namespace hyperberry::detail
