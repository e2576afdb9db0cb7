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
#include <numbers>
#include <stdexcept>

namespace hyperberry {

inline constexpr double kInvSqrtTwoPi = 0.39894228040143267794;

/// Standard normal density.
inline double normal_pdf(double x) { return kInvSqrtTwoPi * std::exp(-0.5 * x * x); }

/// Standard normal distribution function. Delegates to erfc, so the left tail
/// keeps full relative accuracy.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// 1 - normal_cdf(x), without cancellation in the right tail.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// phi''(x) = (x^2 - 1) phi(x).
inline double normal_pdf_second_derivative(double x) {
  return (x * x - 1.0) * normal_pdf(x);
}

/// phi(x)/x, an upper bound on 1 - Phi(x) for x > 0.
inline double mills_upper_tail(double x) {
  if (!(x > 0.0)) throw std::domain_error("mills_upper_tail: need x > 0");
  return normal_pdf(x) / x;
}

}  // namespace hyperberry
