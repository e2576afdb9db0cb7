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
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperberry/bounds.hpp"
#include "hyperberry/exact.hpp"
#include "hyperberry/gaussian.hpp"
#include "hyperberry/params.hpp"
#include "hyperberry/sweep.hpp"

namespace hyperberry {

/// Error budget of the log-space backend on any cdf value.
inline constexpr double kLogspaceErrorBudget = 1e-10;

enum class JumpSide { left_limit, at_point };

inline const char* to_string(JumpSide side) {
  return side == JumpSide::left_limit ? "left-limit" : "at-point";
}

/**
 * Signed deviation P(Z <= x) - Phi(x) at a jump z_k of the standardized
 * lattice, Z = (X - np)/sigma, both at z_k and in the limit from the left.
 * Right of the centre the deviation is formed from survival functions so
 * the far right tail keeps its relative accuracy; the two forms mirror each
 * other exactly, so X and its reflection give the same deviations.
 */
struct JumpDeviation {
  std::int64_t k = 0;
  double z = 0.0;
  double at_point = 0.0;
  double left_limit = 0.0;
};

inline JumpDeviation jump_deviation(const Distribution& dist, std::int64_t k) {
  JumpDeviation d;
  d.k = k;
  d.z = dist.params().standardized(k);
  if (d.z == 0.0) {
    // F - 1/2 = (F - (1 - F)) / 2, written so reflecting X negates it bit for bit.
    d.at_point = 0.5 * (dist.cdf(k) - dist.sf(k));
    d.left_limit = 0.5 * (dist.cdf(k - 1) - dist.sf(k - 1));
  } else if (d.z < 0.0) {
    const double phi = normal_cdf(d.z);
    d.at_point = dist.cdf(k) - phi;
    d.left_limit = dist.cdf(k - 1) - phi;
  } else {
    const double tail = normal_sf(d.z);
    d.at_point = tail - dist.sf(k);
    d.left_limit = tail - dist.sf(k - 1);
  }
  return d;
}

/// Calls fn(JumpDeviation) for every point of the support.
template <class Fn>
void for_each_jump(const Distribution& dist, Fn&& fn) {
  for (std::int64_t k = dist.support_min(); k <= dist.support_max(); ++k) {
    fn(jump_deviation(dist, k));
  }
}

/// Kolmogorov distance between the standardized law and N(0, 1).
struct DeltaReport {
  HypParams params;
  Backend backend = Backend::rational;
  double delta_sup = 0.0;
  std::int64_t argmax_k = 0;
  JumpSide side = JumpSide::at_point;
  double delta_times_sigma = 0.0;
};

/**
 * sup_x |P(Z <= x) - Phi(x)| from the jump points alone: the law of Z is a
 * step function and Phi is continuous and increasing, so the supremum is
 * attained at a jump, either at the point or in the limit from the left.
 *
 * Outside the log-space window the cdf is 0 or 1 to double precision and
 * the deviation is monotone in k, so only the window and its two
 * neighbouring lattice points need to be visited.
 */
inline DeltaReport delta_exact(const Distribution& dist) {
  const HypParams& params = dist.params();
  DeltaReport r{params, dist.backend(), -1.0, 0, JumpSide::at_point, 0.0};
  const auto lo = std::max(dist.support_min(), dist.window_min() - 1);
  const auto hi = std::min(dist.support_max(), dist.window_max() + 1);
  for (std::int64_t k = lo; k <= hi; ++k) {
    const JumpDeviation d = jump_deviation(dist, k);
    if (std::abs(d.left_limit) > r.delta_sup) {
      r.delta_sup = std::abs(d.left_limit);
      r.argmax_k = k;
      r.side = JumpSide::left_limit;
    }
    if (std::abs(d.at_point) > r.delta_sup) {
      r.delta_sup = std::abs(d.at_point);
      r.argmax_k = k;
      r.side = JumpSide::at_point;
    }
  }
  if (dist.backend() == Backend::logspace && r.delta_sup < 10.0 * kLogspaceErrorBudget) {
    throw gate_refusal("logspace_error_budget",
                       "delta " + format_decimal(r.delta_sup) +
                           " is within 10x of the log-space error budget");
  }
  r.delta_times_sigma = r.delta_sup * params.sigma();
  return r;
}

inline DeltaReport delta_exact(const HypParams& params) {
  return delta_exact(Distribution(params));
}

inline DeltaReport delta_exact(const HypParams& params, Backend backend) {
  return delta_exact(Distribution(params, backend));
}

/// floor(t), except that t within 1e-9 (relative) of an integer snaps to it,
/// so that x = z_k lands on k despite rounding in n p + x sigma.
inline std::int64_t snapped_floor(double t) {
  const double r = std::nearbyint(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(t));
}

inline std::int64_t snapped_ceil(double t) {
  const double r = std::nearbyint(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(t));
}

/// P((X - np)/sigma <= x) - Phi(x).
inline double delta_star_at(const Distribution& dist, double x) {
  require_finite(x, "delta_star_at");
  const HypParams& params = dist.params();
  const std::int64_t j = snapped_floor(params.mean() + x * params.sigma());
  if (x < 0.0) return dist.cdf(j) - normal_cdf(x);
  return normal_sf(x) - dist.sf(j);
}

inline double delta_star_at(const HypParams& params, double x) {
  return delta_star_at(Distribution(params), x);
}

/// P(|X - np| >= x sigma) for x > 0.
inline double two_sided_tail(const Distribution& dist, double x) {
  require_finite(x, "two_sided_tail");
  if (!(x > 0.0)) throw std::domain_error("two_sided_tail: need x > 0");
  const HypParams& params = dist.params();
  const double reach = x * params.sigma();
  const std::int64_t low = snapped_floor(params.mean() - reach);
  const std::int64_t high = snapped_ceil(params.mean() + reach);
  if (high <= low) return 1.0;
  return dist.cdf(low) + dist.sf(high - 1);
}

/// P(|X - np| >= |k - np|), decided in integers on the lattice.
inline double two_sided_tail_at(const Distribution& dist, std::int64_t k) {
  const HypParams& params = dist.params();
  const __int128 N = params.population();
  const __int128 centre = static_cast<__int128>(params.sample_size()) * params.marked();
  __int128 reach = static_cast<__int128>(k) * N - centre;
  if (reach < 0) reach = -reach;
  if (reach == 0) return 1.0;
  auto floor_div = [](__int128 a, __int128 b) {
    __int128 q = a / b;
    if (q * b > a) --q;
    return q;
  };
  const auto low = static_cast<std::int64_t>(floor_div(centre - reach, N));
  const auto high = static_cast<std::int64_t>(-floor_div(-(centre + reach), N));
  return dist.cdf(low) + dist.sf(high - 1);
}

/// log|deviation| paired with the coordinate and tail weight of the bound.
struct BoundPoint {
  double log_abs_deviation = 0.0;
  double x = 0.0;
  double weight = 0.0;
};

/**
 * Every nonzero jump deviation with the tail weight the bound uses there.
 * The left limit at z_k is paired with the weight from the left.
 */
inline std::vector<BoundPoint> nonuniform_points(const Distribution& dist) {
  const HypParams& params = dist.params();
  const double p = params.marked_fraction();
  const double q = params.unmarked_fraction();
  std::vector<BoundPoint> out;
  for_each_jump(dist, [&](const JumpDeviation& d) {
    if (d.at_point != 0.0) {
      out.push_back({std::log(std::abs(d.at_point)), d.z, tail_weight(params, d.z)});
    }
    if (d.left_limit != 0.0) {
      out.push_back({std::log(std::abs(d.left_limit)), d.z, d.z > 0.0 ? p : q});
    }
  });
  return out;
}

/// Two-sided tails P(|Z| >= |z_k|) at every lattice point with z_k != 0.
inline std::vector<BoundPoint> tail_points(const Distribution& dist) {
  const HypParams& params = dist.params();
  const double m = std::min(params.marked_fraction(), params.unmarked_fraction());
  std::vector<BoundPoint> out;
  for (std::int64_t k = dist.support_min(); k <= dist.support_max(); ++k) {
    const double z = params.standardized(k);
    if (z == 0.0) continue;
    const double tail = two_sided_tail_at(dist, k);
    if (tail > 0.0) out.push_back({std::log(tail), std::abs(z), m});
  }
  return out;
}

/// log of the smallest scale C with |deviation| <= C/sigma (1 + x^2)/w exp(-rate x^2 w^2).
inline double required_log_nonuniform_scale(const std::vector<BoundPoint>& pts,
                                            double sigma, double rate) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pt : pts) {
    worst = std::max(worst, pt.log_abs_deviation + std::log(sigma) + std::log(pt.weight) -
                                std::log1p(pt.x * pt.x) +
                                rate * pt.x * pt.x * pt.weight * pt.weight);
  }
  return worst;
}

/// log of the smallest C with tail <= C / m^3 exp(-rate x^2 m^2).
inline double required_log_tail_scale(const std::vector<BoundPoint>& pts, double rate) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pt : pts) {
    worst = std::max(worst, pt.log_abs_deviation + 3.0 * std::log(pt.weight) +
                                rate * pt.x * pt.x * pt.weight * pt.weight);
  }
  return worst;
}

/**
 * Largest relative excess of |deviation| over the non-uniform bound across
 * every jump: max (|deviation| / bound - 1). A value <= 0 means the bound
 * holds everywhere. Evaluated in log space, so underflow on either side
 * cannot hide a violation.
 */
inline double max_nonuniform_violation(const Distribution& dist, const ConstantSet& consts) {
  const HypParams& params = dist.params();
  const double log_excess =
      required_log_nonuniform_scale(nonuniform_points(dist), params.sigma(), consts.c(4)) -
      std::log(consts.c(3));
  return std::expm1(log_excess);
}

/// Search lattice for the calibrated constants: rates seed * 2^-j for
/// j < rate_steps (tried from the largest), scales seed * 2^i for
/// i < scale_steps (smallest admissible one is taken).
struct CalibrationLattice {
  double rate_seed = 0.07;
  int rate_steps = 21;
  double scale_seed = 0.01;
  int scale_steps = 31;
};

class calibration_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-instance evidence gathered once and shared by every calibration pass.
struct InstanceEvidence {
  HypParams params;
  double delta_times_sigma = 0.0;
  std::vector<BoundPoint> nonuniform;
  std::vector<BoundPoint> tails;
};

inline InstanceEvidence gather_evidence(const HypParams& params, bool with_bound_points) {
  const Distribution dist(params);
  InstanceEvidence e{params, delta_exact(dist).delta_times_sigma, {}, {}};
  if (with_bound_points) {
    e.nonuniform = nonuniform_points(dist);
    e.tails = tail_points(dist);
  }
  return e;
}

namespace detail {

/// Lexicographic search: largest rate first, then the smallest scale.
template <class Required>
std::pair<double, double> search_lattice(const CalibrationLattice& lattice,
                                         Required required_log_scale, const char* what) {
  for (int j = 0; j < lattice.rate_steps; ++j) {
    const double rate = std::ldexp(lattice.rate_seed, -j);
    const double need = required_log_scale(rate);
    for (int i = 0; i < lattice.scale_steps; ++i) {
      const double scale = std::ldexp(lattice.scale_seed, i);
      if (std::log(scale) >= need) return {scale, rate};
    }
  }
  throw calibration_error(std::string("no (scale, rate) pair on the search lattice satisfies "
                                      "every training instance for the ") + what);
}

}  // namespace detail

/**
 * Empirical constants.
 *
 * C1 and C2 are the max and min of delta * sigma over `uniform_train`.
 * (C3, C4) and (C5, C6) are the lexicographically first lattice pairs that
 * make the non-uniform and tail bounds hold at every lattice point of every
 * instance in `gated_train`, all of which must pass the delta*sigma gate.
 */
inline ConstantSet calibrate_constants(const std::vector<HypParams>& uniform_train,
                                       const std::vector<HypParams>& gated_train,
                                       std::string grid_descriptor,
                                       const CalibrationLattice& lattice = {}) {
  if (uniform_train.empty()) throw calibration_error("no training instances for C1, C2");
  if (gated_train.empty()) throw calibration_error("no gate-passing training instances for C3..C6");
  for (const auto& p : gated_train) require_gate(p);

  const auto uniform = parallel_map(uniform_train.size(), [&](std::size_t i) {
    return delta_exact(uniform_train[i]).delta_times_sigma;
  });
  const auto gated = parallel_map(gated_train.size(), [&](std::size_t i) {
    return gather_evidence(gated_train[i], true);
  });

  ConstantSet out;
  out.values[0] = *std::max_element(uniform.begin(), uniform.end());
  out.values[1] = *std::min_element(uniform.begin(), uniform.end());

  const auto [c3, c4] = detail::search_lattice(
      lattice,
      [&](double rate) {
        double need = -std::numeric_limits<double>::infinity();
        for (const auto& e : gated) {
          need = std::max(need, required_log_nonuniform_scale(e.nonuniform, e.params.sigma(), rate));
        }
        return need;
      },
      "non-uniform bound");
  const auto [c5, c6] = detail::search_lattice(
      lattice,
      [&](double rate) {
        double need = -std::numeric_limits<double>::infinity();
        for (const auto& e : gated) need = std::max(need, required_log_tail_scale(e.tails, rate));
        return need;
      },
      "tail inequality");
  out.values[2] = c3;
  out.values[3] = c4;
  out.values[4] = c5;
  out.values[5] = c6;
  out.provenance.fill(Provenance::calibrated);
  out.grid = std::move(grid_descriptor);
  return out;
}

/// Calibrates on a grid: C1, C2 from every instance, C3..C6 from the
/// gate-passing ones.
inline ConstantSet calibrate_constants(const SweepGrid& train,
                                       const CalibrationLattice& lattice = {}) {
  std::vector<HypParams> all;
  std::vector<HypParams> gated;
  for (const auto& inst : train.instances()) {
    all.push_back(inst.params);
    if (bound_profile(inst.params).gate_ok) gated.push_back(inst.params);
  }
  return calibrate_constants(all, gated, train.describe(), lattice);
}

/// delta * sigma across a family; a positive floor is evidence the 1/sigma
/// rate cannot be improved.
struct OptimalityReport {
  struct Row {
    HypParams params;
    double delta = 0.0;
    double delta_times_sigma = 0.0;
  };
  std::vector<Row> rows;
  double min_delta_times_sigma = 0.0;
  double max_delta_times_sigma = 0.0;
  /// delta * sigma at the largest N is at least half its value at the smallest N.
  bool no_trend_to_zero = false;
};

inline OptimalityReport optimality_check(const std::vector<HypParams>& family) {
  if (family.empty()) throw std::invalid_argument("optimality_check: empty family");
  for (const auto& p : family) {
    if (p.sigma() < 3.0) {
      throw std::invalid_argument("optimality_check: sigma < 3 for " + p.to_string());
    }
  }
  const auto reports = parallel_map(family.size(), [&](std::size_t i) { return delta_exact(family[i]); });
  OptimalityReport out;
  for (const auto& r : reports) out.rows.push_back({r.params, r.delta_sup, r.delta_times_sigma});
  auto by_value = [](const auto& a, const auto& b) { return a.delta_times_sigma < b.delta_times_sigma; };
  out.min_delta_times_sigma = std::min_element(out.rows.begin(), out.rows.end(), by_value)->delta_times_sigma;
  out.max_delta_times_sigma = std::max_element(out.rows.begin(), out.rows.end(), by_value)->delta_times_sigma;
  auto by_population = [](const auto& a, const auto& b) {
    return a.params.population() < b.params.population();
  };
  const auto& smallest = *std::min_element(out.rows.begin(), out.rows.end(), by_population);
  const auto& largest = *std::max_element(out.rows.begin(), out.rows.end(), by_population);
  out.no_trend_to_zero = largest.delta_times_sigma >= 0.5 * smallest.delta_times_sigma;
  return out;
}

inline OptimalityReport optimality_check(const SweepGrid& grid) {
  std::vector<HypParams> family;
  for (const auto& inst : grid.instances()) family.push_back(inst.params);
  return optimality_check(family);
}

/// (N, sigma^2, delta) along a trajectory of growing N.
struct CltExperiment {
  struct Row {
    HypParams params;
    double sigma2 = 0.0;
    double delta = 0.0;
  };
  std::vector<Row> rows;
  bool delta_strictly_decreasing = false;
  double min_delta = 0.0;
  double max_delta_times_sigma = 0.0;
  /// delta at the first point over delta at the last.
  double first_to_last_ratio = 0.0;
};

inline CltExperiment clt_experiment(const std::vector<HypParams>& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("clt_experiment: empty trajectory");
  const auto reports =
      parallel_map(trajectory.size(), [&](std::size_t i) { return delta_exact(trajectory[i]); });
  CltExperiment out;
  out.delta_strictly_decreasing = reports.size() > 1;
  out.min_delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out.rows.push_back({r.params, r.params.sigma2(), r.delta_sup});
    out.min_delta = std::min(out.min_delta, r.delta_sup);
    out.max_delta_times_sigma = std::max(out.max_delta_times_sigma, r.delta_times_sigma);
    if (i > 0 && !(r.delta_sup < reports[i - 1].delta_sup)) out.delta_strictly_decreasing = false;
  }
  out.first_to_last_ratio = reports.front().delta_sup / reports.back().delta_sup;
  return out;
}

inline CltExperiment clt_experiment(const SweepGrid& trajectory) {
  std::vector<HypParams> seq;
  for (const auto& inst : trajectory.instances()) seq.push_back(inst.params);
  return clt_experiment(seq);
}

/// Exact duality checks on rational-backend instances.
struct DualityReport {
  std::size_t instances = 0;
  std::size_t points_checked = 0;
  std::size_t leftover_violations = 0;   // P(X = j) != P(Y = M - j)
  std::size_t reflect_violations = 0;    // P(X = j) != P(V = n - j)
  std::size_t delta_violations = 0;      // delta(X) != delta(Y) or delta(V)
  std::vector<std::string> failures;

  bool ok() const {
    return leftover_violations == 0 && reflect_violations == 0 && delta_violations == 0;
  }
};

inline DualityReport duality_suite(const std::vector<HypParams>& instances) {
  DualityReport out;
  for (const auto& params : instances) {
    if (default_backend(params) != Backend::rational) {
      throw std::invalid_argument("duality_suite: rational backend required for " +
                                  params.to_string());
    }
    const Distribution x(params, Backend::rational);
    const Distribution y(dual_leftover(params), Backend::rational);
    const Distribution v(dual_reflect(params), Backend::rational);
    const auto n = params.sample_size();
    const auto M = params.marked();
    // The three laws share the denominator C(N, n) = C(N, N - n), so the
    // pmfs agree iff the numerators do.
    const bool same_denominator = x.denominator() == y.denominator() &&
                                  x.denominator() == v.denominator();
    for (std::int64_t j = x.support_min(); j <= x.support_max(); ++j) {
      ++out.points_checked;
      if (!same_denominator || x.numerator(j) != y.numerator(M - j)) {
        ++out.leftover_violations;
        out.failures.push_back("leftover " + params.to_string() + " j=" + std::to_string(j));
      }
      if (!same_denominator || x.numerator(j) != v.numerator(n - j)) {
        ++out.reflect_violations;
        out.failures.push_back("reflect " + params.to_string() + " j=" + std::to_string(j));
      }
    }
    const double dx = delta_exact(x).delta_sup;
    if (dx != delta_exact(y).delta_sup || dx != delta_exact(v).delta_sup) {
      ++out.delta_violations;
      out.failures.push_back("delta " + params.to_string());
    }
    ++out.instances;
  }
  return out;
}

inline DualityReport duality_suite(const SweepGrid& grid) {
  std::vector<HypParams> all;
  for (const auto& inst : grid.instances()) all.push_back(inst.params);
  return duality_suite(all);
}

}  // namespace hyperberry
