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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hyperberry/gaussian.hpp"
#include "hyperberry/params.hpp"

namespace hyperberry {

/**
 * Three standardizations of a lattice point k.
 *
 *   z_binomial          = (k - n p) / sqrt(n p q)
 *   expansion_parameter = z_binomial / ((1 - f) sqrt(n p q))
 *   z                   = (k - n p) / sigma = z_binomial / sqrt(1 - f)
 *
 * expansion_parameter controls the size of the remainder in the
 * log-pmf expansion; z is the coordinate the normal approximation lives in.
 */
struct Standardized {
  std::int64_t k = 0;
  double z_binomial = 0.0;
  double expansion_parameter = 0.0;
  double z = 0.0;
};

inline Standardized standardize(const HypParams& params, std::int64_t k) {
  const double npq = params.sample_size() * params.marked_fraction() *
                     params.unmarked_fraction();
  const double root = std::sqrt(npq);
  const double one_minus_f = 1.0 - params.sampling_fraction();
  Standardized s;
  s.k = k;
  s.z_binomial = (static_cast<double>(k) - params.mean()) / root;
  s.expansion_parameter = s.z_binomial / (one_minus_f * root);
  s.z = params.standardized(k);
  return s;
}

/// Enclosure 1/(12m+1) <= log m! - [log sqrt(2 pi) - m + (m + 1/2) log m] <= 1/(12m).
struct StirlingEps {
  std::int64_t m = 1;
  double lower = 0.0;
  double upper = 0.0;
};

inline StirlingEps stirling_eps_bounds(std::int64_t m) {
  if (m < 1) throw std::domain_error("stirling_eps_bounds: need m >= 1");
  const double md = static_cast<double>(m);
  return {m, 1.0 / (12.0 * md + 1.0), 1.0 / (12.0 * md)};
}

/// Default remainder window for standalone use.
inline constexpr double kDefaultExpansionWindow = 0.5;

/// Conditions under which the log-pmf expansion carries a certified remainder.
struct Applicability {
  bool sampling_fraction_interior = false;  // 0 < f < 1
  bool proportion_interior = false;         // 0 < p < 1
  bool min_expected_count = false;          // 6 min(np, nq) >= 1
  bool within_window = false;               // |expansion_parameter| <= delta
  bool in_support = false;

  bool all() const {
    return sampling_fraction_interior && proportion_interior &&
           min_expected_count && within_window && in_support;
  }

  /// Name of the first failed condition, or "" when all pass.
  const char* first_failure() const {
    if (!sampling_fraction_interior) return "sampling_fraction_interior";
    if (!proportion_interior) return "proportion_interior";
    if (!min_expected_count) return "min_expected_count";
    if (!within_window) return "within_window";
    if (!in_support) return "in_support";
    return "";
  }
};

inline void check_window(double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) {
    throw std::domain_error("expansion window delta must lie in (0, 1/2]");
  }
}

inline Applicability check_applicability(const HypParams& params, std::int64_t k,
                                         double delta) {
  check_window(delta);
  const double f = params.sampling_fraction();
  const double p = params.marked_fraction();
  Applicability a;
  a.sampling_fraction_interior = f > 0.0 && f < 1.0;
  a.proportion_interior = p > 0.0 && p < 1.0;
  // 6 min(nM, n(N-M))/N >= 1, decided in integers.
  const auto mn = params.marked() < params.population() - params.marked()
                      ? params.marked()
                      : params.population() - params.marked();
  a.min_expected_count = static_cast<__int128>(6) * params.sample_size() * mn >=
                         params.population();
  a.within_window = std::abs(standardize(params, k).expansion_parameter) <= delta;
  a.in_support = params.in_support(k);
  return a;
}

/**
 * Certified approximation of P(X = k):
 *
 *   log P(k) = -z_b^2 / (2(1 - f)) - log(2 pi n p q (1 - f)) / 2 + r(k),
 *
 * with |r(k)| <= remainder_bound. The exact pmf lies in [lower, upper].
 */
struct CertifiedProb {
  double log_main = 0.0;
  double remainder_bound = 0.0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Remainder bound for the log-pmf expansion at expansion parameter `a`.
/// Includes a single relative slack of 1e-12 for floating point rounding.
inline double expansion_remainder_bound(double npq, double f, double a, double delta) {
  const double one_minus_delta = 1.0 - delta;
  const double cube = one_minus_delta * one_minus_delta * one_minus_delta;
  const double abs_a = std::abs(a);
  const double stirling_part = 1.0 / (6.0 * npq * one_minus_delta * (1.0 - f));
  const double low_order = 0.5 * abs_a + a * a * (0.25 + 2.0 * delta / cube);
  const double cubic = abs_a * abs_a * abs_a * npq * (f / 4.0 + 1.0) *
                       (0.5 + 2.0 * (1.0 + delta) / cube);
  return (stirling_part + low_order + cubic) * (1.0 + 1e-12);
}

inline CertifiedProb certified_pmf(const HypParams& params, std::int64_t k,
                                   double delta = kDefaultExpansionWindow) {
  const Applicability gate = check_applicability(params, k, delta);
  if (!gate.all()) {
    throw gate_refusal(gate.first_failure(),
                       "no certified enclosure at k=" + std::to_string(k) +
                           " for " + params.to_string());
  }
  const double f = params.sampling_fraction();
  const double npq = params.sample_size() * params.marked_fraction() *
                     params.unmarked_fraction();
  const Standardized s = standardize(params, k);

  CertifiedProb out;
  out.log_main = -s.z_binomial * s.z_binomial / (2.0 * (1.0 - f)) -
                 0.5 * std::log(2.0 * std::numbers::pi * npq * (1.0 - f));
  out.remainder_bound = expansion_remainder_bound(npq, f, s.expansion_parameter, delta);
  out.value = std::exp(out.log_main);
  out.lower = std::exp(out.log_main - out.remainder_bound);
  out.upper = std::exp(out.log_main + out.remainder_bound);
  return out;
}

/// phi(z_k) / sigma: the normal density approximation to P(X = k).
inline double gaussian_main_term(const HypParams& params, std::int64_t k) {
  return normal_pdf(params.standardized(k)) / params.sigma();
}

}  // namespace hyperberry
