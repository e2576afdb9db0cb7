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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperberry/params.hpp"

namespace hyperberry {

/**
 * Quantities that decide whether the non-uniform bound applies.
 *
 * folded_fraction is f folded onto (0, 1/2]; growth_coefficient is
 * (f + 4)/(4(1 - f)) at the folded f; delta = 1 / (10 max(growth, 2)). The
 * gate is delta * sigma > 1, which holds whenever sigma >= 25.
 */
struct BoundProfile {
  double folded_fraction = 0.0;
  double growth_coefficient = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  bool gate_ok = false;
};

inline BoundProfile bound_profile(const HypParams& params) {
  BoundProfile b;
  // Fold in integers so f and 1 - f map to the same double.
  const auto n = params.sample_size();
  const auto N = params.population();
  const auto folded = 2 * n <= N ? n : N - n;
  b.folded_fraction = static_cast<double>(folded) / static_cast<double>(N);
  b.growth_coefficient = (b.folded_fraction + 4.0) / (4.0 * (1.0 - b.folded_fraction));
  // growth <= 2 exactly when the folded f <= 4/9; decided in integers so the
  // boundary case gets delta = 1/20 without rounding.
  const bool flat = static_cast<__int128>(9) * folded <= static_cast<__int128>(4) * N;
  b.delta = flat ? 1.0 / 20.0 : 1.0 / (10.0 * b.growth_coefficient);
  b.sigma = params.sigma();
  b.gate_ok = b.delta * b.sigma > 1.0;
  return b;
}

enum class Provenance { proof_traced, calibrated };

inline const char* to_string(Provenance p) {
  return p == Provenance::proof_traced ? "proof-traced" : "calibrated";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "proof-traced") return Provenance::proof_traced;
  if (s == "calibrated") return Provenance::calibrated;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

/**
 * The six constants of the uniform, non-uniform and tail bounds.
 *
 * Index 0..5 holds C1..C6: C1/sigma is the uniform bound, C2/sigma the
 * optimality floor, (C3, C4) scale and rate of the non-uniform bound and
 * (C5, C6) those of the tail inequality.
 */
struct ConstantSet {
  std::array<double, 6> values{};
  std::array<Provenance, 6> provenance{};
  std::string grid;
  std::string calibrated_at;

  double c(int i) const { return values.at(static_cast<std::size_t>(i - 1)); }
  Provenance source(int i) const {
    return provenance.at(static_cast<std::size_t>(i - 1));
  }

  void validate() const {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw std::invalid_argument("constant C" + std::to_string(i + 1) +
                                    " must be finite and positive");
      }
    }
  }

  friend bool operator==(const ConstantSet&, const ConstantSet&) = default;
};

/// Exponent rate the far-tail argument produces directly: 0.07 delta^2 (1-f)^2
/// at the worst case delta = 1/25, f = 1/2.
inline constexpr double kProofTracedRate = 0.07 / (25.0 * 25.0) * 0.25;

/**
 * Replaces the rate constants C4 and C6 by the proof-traced rate.
 *
 * The scale constants have no numeric value in the proof and keep their
 * calibrated values; a smaller rate only enlarges the bounds, so calibrated
 * scales remain valid.
 */
inline ConstantSet with_proof_traced_rates(ConstantSet consts) {
  consts.values[3] = kProofTracedRate;
  consts.values[5] = kProofTracedRate;
  consts.provenance[3] = Provenance::proof_traced;
  consts.provenance[5] = Provenance::proof_traced;
  return consts;
}

/// A bound value tagged with the weakest provenance among the constants used.
struct BoundValue {
  double value = 0.0;
  Provenance provenance = Provenance::calibrated;
};

inline Provenance combine(Provenance a, Provenance b) {
  return (a == Provenance::calibrated || b == Provenance::calibrated)
             ? Provenance::calibrated
             : Provenance::proof_traced;
}

/// C1 / sigma.
inline BoundValue uniform_bound(const HypParams& params, const ConstantSet& consts) {
  return {consts.c(1) / params.sigma(), consts.source(1)};
}

/// q below the centre, p above it, min(p, q) at x = 0.
inline double tail_weight(const HypParams& params, double x) {
  const double p = params.marked_fraction();
  const double q = params.unmarked_fraction();
  if (x < 0.0) return q;
  if (x > 0.0) return p;
  return std::min(p, q);
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": x must be finite");
}

inline void require_gate(const HypParams& params) {
  const BoundProfile b = bound_profile(params);
  if (!b.gate_ok) {
    throw gate_refusal("delta_sigma_gate",
                       "delta*sigma = " + std::to_string(b.delta * b.sigma) +
                           " <= 1 for " + params.to_string());
  }
}

/// log of (C3/sigma) (1 + x^2)/lambda exp(-C4 x^2 lambda^2), no gate check.
inline double log_nonuniform_bound_unchecked(const HypParams& params, double x,
                                             double scale, double rate) {
  const double lambda = tail_weight(params, x);
  return std::log(scale) - std::log(params.sigma()) + std::log1p(x * x) -
         std::log(lambda) - rate * x * x * lambda * lambda;
}

/// Pointwise bound on |P((X - np)/sigma <= x) - Phi(x)| with sub-Gaussian decay.
inline BoundValue nonuniform_bound(const HypParams& params, double x,
                                   const ConstantSet& consts) {
  require_finite(x, "nonuniform_bound");
  require_gate(params);
  const double lambda = tail_weight(params, x);
  const double value = consts.c(3) / params.sigma() * (1.0 + x * x) / lambda *
                       std::exp(-consts.c(4) * x * x * lambda * lambda);
  return {value, combine(consts.source(3), consts.source(4))};
}

/// log of C5 / m^3 exp(-C6 x^2 m^2) with m = min(p, q), no gate check.
inline double log_tail_bound_unchecked(const HypParams& params, double x,
                                       double scale, double rate) {
  const double m = std::min(params.marked_fraction(), params.unmarked_fraction());
  return std::log(scale) - 3.0 * std::log(m) - rate * x * x * m * m;
}

/// Bound on P(|X - np|/sigma >= x), clamped to 1.
inline BoundValue tail_bound(const HypParams& params, double x,
                             const ConstantSet& consts) {
  require_finite(x, "tail_bound");
  if (!(x > 0.0)) throw std::domain_error("tail_bound: need x > 0");
  require_gate(params);
  const double m = std::min(params.marked_fraction(), params.unmarked_fraction());
  const double raw = consts.c(5) / (m * m * m) * std::exp(-consts.c(6) * x * x * m * m);
  return {std::min(1.0, raw), combine(consts.source(5), consts.source(6))};
}

/// Per-item diagnostics for the central limit condition sigma^2 -> infinity.
struct CltItem {
  HypParams params;
  double sigma2 = 0.0;
  std::int64_t sample = 0;      // n
  std::int64_t unsampled = 0;   // N - n
  std::int64_t marked = 0;      // M
  std::int64_t unmarked = 0;    // N - M
  bool sigma2_increased = false;  // relative to the previous item
};

struct CltReport {
  std::vector<CltItem> items;
  /// sigma^2 strictly increasing along the whole sequence.
  bool sigma2_increasing = false;
  /// n, N - n, M, N - M each strictly increasing along the sequence.
  bool counts_increasing = false;
};

inline CltReport clt_condition(const std::vector<HypParams>& sequence) {
  if (sequence.empty()) throw std::invalid_argument("clt_condition: empty sequence");
  CltReport report;
  report.sigma2_increasing = sequence.size() > 1;
  report.counts_increasing = sequence.size() > 1;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const HypParams& p = sequence[i];
    CltItem item{p,
                 p.sigma2(),
                 p.sample_size(),
                 p.population() - p.sample_size(),
                 p.marked(),
                 p.population() - p.marked(),
                 false};
    if (i > 0) {
      const CltItem& prev = report.items.back();
      item.sigma2_increased = item.sigma2 > prev.sigma2;
      report.sigma2_increasing = report.sigma2_increasing && item.sigma2_increased;
      report.counts_increasing = report.counts_increasing &&
                                 item.sample > prev.sample &&
                                 item.unsampled > prev.unsampled &&
                                 item.marked > prev.marked &&
                                 item.unmarked > prev.unmarked;
    }
    report.items.push_back(item);
  }
  return report;
}

}  // namespace hyperberry
