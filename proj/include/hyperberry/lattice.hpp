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
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hyperberry/gaussian.hpp"

namespace hyperberry {

/// Lattice b, b + h, ..., b + k h and the peak of a unimodal g sampled on it.
struct LatticeSumCase {
  double start = 0.0;
  double step = 1.0;
  std::int64_t steps = 0;
  double peak = 0.0;
};

/// The two sides of an inequality lhs <= rhs.
struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

namespace detail {

inline constexpr int kUnimodalSamples = 10000;

template <class G>
void require_unimodal(const G& g, double lo, double hi, double peak) {
  std::vector<double> xs;
  xs.reserve(kUnimodalSamples + 1);
  for (int i = 0; i < kUnimodalSamples; ++i) {
    xs.push_back(lo + (hi - lo) * i / (kUnimodalSamples - 1));
  }
  if (peak > lo && peak < hi) xs.push_back(peak);
  std::sort(xs.begin(), xs.end());

  std::vector<double> ys(xs.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ys[i] = g(xs[i]);
    if (!(ys[i] >= 0.0)) throw std::invalid_argument("g must be nonnegative");
    scale = std::max(scale, ys[i]);
  }
  const double tol = 1e-12 * scale;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] <= peak && ys[i] < ys[i - 1] - tol) {
      throw std::invalid_argument("g decreases before its declared peak");
    }
    if (xs[i - 1] >= peak && ys[i] > ys[i - 1] + tol) {
      throw std::invalid_argument("g increases after its declared peak");
    }
  }
}

template <class G>
double integrate(const G& g, double lo, double hi, double split) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (!(hi > lo)) return 0.0;
  if (split > lo && split < hi) {
    return Rule::integrate(g, lo, split, 15, 1e-13) +
           Rule::integrate(g, split, hi, 15, 1e-13);
  }
  return Rule::integrate(g, lo, hi, 15, 1e-13);
}

}  // namespace detail

/**
 * Sum of a unimodal nonnegative g over a lattice against its integral:
 *
 *   sum_{i=0..k} g(b + i h) <= (1/h) int_b^{b+kh} g + 2 max_i g(b + i h).
 *
 * Unimodality is certified by dense sampling around the declared peak;
 * std::invalid_argument is thrown if the samples contradict it.
 */
template <class G>
InequalitySides monotone_sum_bound(const LatticeSumCase& c, const G& g) {
  if (!(c.step > 0.0) || c.steps < 0) {
    throw std::invalid_argument("monotone_sum_bound: need h > 0 and k >= 0");
  }
  const double end = c.start + c.step * static_cast<double>(c.steps);
  if (c.steps > 0) detail::require_unimodal(g, c.start, end, c.peak);

  double sum = 0.0;
  double largest = 0.0;
  for (std::int64_t i = 0; i <= c.steps; ++i) {
    const double v = g(c.start + c.step * static_cast<double>(i));
    if (!(v >= 0.0)) throw std::invalid_argument("g must be nonnegative");
    sum += v;
    largest = std::max(largest, v);
  }
  const double integral = detail::integrate(g, c.start, end, c.peak);
  return {sum, integral / c.step + 2.0 * largest};
}

/// int_lo^hi |phi''(x)| dx in closed form: phi'' integrates to -x phi(x), and
/// the sign of phi'' changes only at +-1.
inline double abs_normal_second_derivative_integral(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  auto antiderivative = [](double x) { return -x * normal_pdf(x); };
  double total = 0.0;
  double left = lo;
  for (const double cut : {-1.0, 1.0}) {
    if (cut > left && cut < hi) {
      total += std::abs(antiderivative(cut) - antiderivative(left));
      left = cut;
    }
  }
  return total + std::abs(antiderivative(hi) - antiderivative(left));
}

/// max |phi''| over [lo, hi]; interior extrema sit at 0 and +-sqrt(3).
inline double max_abs_normal_second_derivative(double lo, double hi) {
  auto f = [](double x) { return std::abs(normal_pdf_second_derivative(x)); };
  double best = std::max(f(lo), f(hi));
  for (const double c : {0.0, std::sqrt(3.0), -std::sqrt(3.0)}) {
    if (c > lo && c < hi) best = std::max(best, f(c));
  }
  return best;
}

/// Phi(hi) - Phi(lo), taken from whichever tail avoids cancellation.
inline double normal_mass(double lo, double hi) {
  if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return 1.0 - normal_cdf(lo) - normal_sf(hi);
}

/**
 * Midpoint-rule error of phi on the lattice b, b + h, ..., b + j0 h:
 *
 *   |h sum phi(b + i h) - int_{b-h/2}^{b+(j0+1/2)h} phi|
 *     <= h^2/12 [int |phi''| + (4 + h) max |phi''|]
 *
 * with both right-hand terms taken over [b - h/2, b + j0 h + h/2].
 */
inline InequalitySides phi_riemann_bound(double b, double h, std::int64_t j0) {
  if (!(b >= 0.0)) throw std::domain_error("phi_riemann_bound: need b >= 0");
  if (!(h > 0.0)) throw std::domain_error("phi_riemann_bound: need h > 0");
  if (j0 < 1) throw std::domain_error("phi_riemann_bound: need j0 >= 1");

  double sum = 0.0;
  for (std::int64_t i = 0; i <= j0; ++i) sum += normal_pdf(b + h * static_cast<double>(i));
  const double lo = b - 0.5 * h;
  const double hi = b + (static_cast<double>(j0) + 0.5) * h;
  const double lhs = std::abs(h * sum - normal_mass(lo, hi));
  const double rhs = h * h / 12.0 *
                     (abs_normal_second_derivative_integral(lo, hi) +
                      (4.0 + h) * max_abs_normal_second_derivative(lo, hi));
  return {lhs, rhs};
}

}  // namespace hyperberry
