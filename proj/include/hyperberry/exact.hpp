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

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hyperberry/detail/loader.hpp"
#include "hyperberry/params.hpp"

namespace hyperberry {

enum class Backend { rational, logspace };

/// Populations up to this size are evaluated in exact rational arithmetic.
inline constexpr std::int64_t kRationalThreshold = 5000;

inline Backend default_backend(const HypParams& params) {
  return params.population() <= kRationalThreshold ? Backend::rational
                                                   : Backend::logspace;
}

inline const char* to_string(Backend backend) {
  return backend == Backend::rational ? "rational" : "logspace";
}

/// Formats a double with 12 significant digits.
inline std::string format_decimal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

/**
 * A probability held either as an exact rational or as a natural log.
 *
 * Log-space values carry a relative error of at most 1e-12 on the
 * probability. Zero is representable in both forms (log = -inf).
 */
class ExactProb {
 public:
  static ExactProb rational(mpq_class value) {
    value.canonicalize();
    return ExactProb(std::move(value));
  }
  static ExactProb logspace(double log_value) { return ExactProb(log_value); }
  static ExactProb zero(Backend backend) {
    return backend == Backend::rational
               ? rational(mpq_class(0))
               : logspace(-std::numeric_limits<double>::infinity());
  }

  Backend backend() const noexcept {
    return std::holds_alternative<mpq_class>(value_) ? Backend::rational
                                                     : Backend::logspace;
  }

  /// Throws std::logic_error on a log-space value.
  const mpq_class& exact() const {
    if (const auto* q = std::get_if<mpq_class>(&value_)) return *q;
    throw std::logic_error("ExactProb: no rational value in log-space backend");
  }

  double value() const {
    if (const auto* q = std::get_if<mpq_class>(&value_)) return q->get_d();
    return std::exp(std::get<double>(value_));
  }

  double log_value() const {
    if (const auto* q = std::get_if<mpq_class>(&value_)) {
      if (sgn(*q) == 0) return -std::numeric_limits<double>::infinity();
      // Split into mantissa/exponent so tiny rationals do not underflow.
      long num_exp = 0;
      long den_exp = 0;
      const double num = mpz_get_d_2exp(&num_exp, q->get_num_mpz_t());
      const double den = mpz_get_d_2exp(&den_exp, q->get_den_mpz_t());
      return std::log(num / den) +
             static_cast<double>(num_exp - den_exp) * std::log(2.0);
    }
    return std::get<double>(value_);
  }

  /// "num/den" for rationals, 12 significant digits otherwise.
  std::string to_string() const {
    if (const auto* q = std::get_if<mpq_class>(&value_)) {
      if (q->get_den() == 1) return q->get_num().get_str();
      return q->get_num().get_str() + "/" + q->get_den().get_str();
    }
    return format_decimal(value());
  }

 private:
  explicit ExactProb(mpq_class value) : value_(std::move(value)) {}
  explicit ExactProb(double log_value) : value_(log_value) {}

  std::variant<mpq_class, double> value_;
};

/// Exact moments: mean = n p, variance = Var X, sigma2 = N p q f (1 - f).
struct Moments {
  mpq_class mean;
  mpq_class variance;
  mpq_class sigma2;
};

inline Moments moments(const HypParams& params) {
  const mpz_class n = params.sample_size();
  const mpz_class M = params.marked();
  const mpz_class N = params.population();
  Moments out;
  out.mean = mpq_class(n * M, N);
  out.sigma2 = mpq_class(n * (N - n) * M * (N - M), N * N * N);
  out.variance = out.sigma2 * mpq_class(N, N - 1);
  out.mean.canonicalize();
  out.sigma2.canonicalize();
  out.variance.canonicalize();
  return out;
}

/// The real j* with P(j + 1) > P(j) iff j < j*, and equality iff j = j*:
/// j* = (M + 1)(n + 1)/(N + 2) - 1.
inline mpq_class mode_threshold(const HypParams& params) {
  mpq_class t(mpz_class(params.marked() + 1) * (params.sample_size() + 1),
              mpz_class(params.population() + 2));
  t.canonicalize();
  return t - 1;
}

/// Smallest maximizer of the pmf.
inline std::int64_t mode(const HypParams& params) {
  // Smallest integer j >= j*, i.e. ceil(((M+1)(n+1) - (N+2)) / (N+2)).
  const __int128 numer =
      static_cast<__int128>(params.marked() + 1) * (params.sample_size() + 1) -
      (params.population() + 2);
  const __int128 denom = params.population() + 2;
  __int128 j = numer / denom;
  if (j * denom < numer) ++j;
  const auto lo = params.support_min();
  const auto hi = params.support_max();
  return std::clamp(static_cast<std::int64_t>(j), lo, hi);
}

/// P(k + 1) / P(k) for k, k + 1 both in the support.
inline double pmf_step_ratio(const HypParams& params, std::int64_t k) {
  const double n = static_cast<double>(params.sample_size());
  const double M = static_cast<double>(params.marked());
  const double N = static_cast<double>(params.population());
  const double kd = static_cast<double>(k);
  return ((M - kd) * (n - kd)) / ((kd + 1.0) * (N - M - n + kd + 1.0));
}

/**
 * The full law of X in one of two backends.
 *
 * Rational: numerators C(M, k) C(N - M, n - k) over the common denominator
 * C(N, n), with exact cumulative sums. Double views are rounded from the
 * exact values.
 *
 * Log-space: the pmf is propagated outward from the mode with the step
 * ratio, re-anchored periodically against the saddle-point log-pmf, until it
 * underflows. cdf is summed from the left below the mode and taken as
 * 1 - sf above it, with sf summed from the right, so neither tail suffers
 * from 1 - tiny cancellation.
 */
class Distribution {
 public:
  explicit Distribution(const HypParams& params)
      : Distribution(params, default_backend(params)) {}

  Distribution(const HypParams& params, Backend backend)
      : params_(params), backend_(backend) {
    if (backend == Backend::rational) {
      build_rational();
    } else {
      build_logspace();
    }
  }

  const HypParams& params() const noexcept { return params_; }
  Backend backend() const noexcept { return backend_; }
  std::int64_t support_min() const noexcept { return params_.support_min(); }
  std::int64_t support_max() const noexcept { return params_.support_max(); }
  std::int64_t mode() const noexcept { return mode_; }

  /// Lattice points outside [window_min, window_max] carry probability below
  /// double range (log-space) or do not exist (rational: window = support).
  std::int64_t window_min() const noexcept { return window_lo_; }
  std::int64_t window_max() const noexcept {
    return window_lo_ + static_cast<std::int64_t>(pmf_.size()) - 1;
  }

  double pmf(std::int64_t k) const {
    if (k < window_lo_ || k > window_max()) return 0.0;
    return pmf_[index(k)];
  }

  double cdf(std::int64_t k) const {
    if (k < window_lo_) return 0.0;
    if (k >= window_max()) return 1.0;
    return cdf_[index(k)];
  }

  /// P(X > k).
  double sf(std::int64_t k) const {
    if (k < window_lo_) return 1.0;
    if (k >= window_max()) return 0.0;
    return sf_[index(k)];
  }

  ExactProb pmf_exact(std::int64_t k) const {
    if (!params_.in_support(k)) return ExactProb::zero(backend_);
    if (backend_ == Backend::rational) {
      return ExactProb::rational(mpq_class(numer_[index(k)], denom_));
    }
    return ExactProb::logspace(detail::log_hypergeometric_pmf(
        k, params_.sample_size(), params_.marked(), params_.population()));
  }

  ExactProb cdf_exact(std::int64_t k) const {
    if (k < support_min()) return ExactProb::zero(backend_);
    if (backend_ == Backend::rational) {
      if (k >= support_max()) return ExactProb::rational(mpq_class(1));
      return ExactProb::rational(mpq_class(cum_[index(k)], denom_));
    }
    return ExactProb::logspace(std::log(cdf(k)));
  }

  ExactProb sf_exact(std::int64_t k) const {
    if (k >= support_max()) return ExactProb::zero(backend_);
    if (backend_ == Backend::rational) {
      if (k < support_min()) return ExactProb::rational(mpq_class(1));
      return ExactProb::rational(mpq_class(denom_ - cum_[index(k)], denom_));
    }
    return ExactProb::logspace(std::log(sf(k)));
  }

  /// Exact numerator C(M, k) C(N - M, n - k); rational backend only.
  const mpz_class& numerator(std::int64_t k) const {
    require_rational();
    return numer_.at(index(k));
  }
  /// Exact denominator C(N, n); rational backend only.
  const mpz_class& denominator() const {
    require_rational();
    return denom_;
  }

 private:
  std::size_t index(std::int64_t k) const {
    return static_cast<std::size_t>(k - window_lo_);
  }

  void require_rational() const {
    if (backend_ != Backend::rational) {
      throw std::logic_error("Distribution: exact numerators need the rational backend");
    }
  }

  void build_rational() {
    const auto n = static_cast<unsigned long>(params_.sample_size());
    const auto M = static_cast<unsigned long>(params_.marked());
    const auto N = static_cast<unsigned long>(params_.population());
    const auto lo = params_.support_min();
    const auto hi = params_.support_max();
    window_lo_ = lo;
    mode_ = hyperberry::mode(params_);

    mpz_bin_uiui(denom_.get_mpz_t(), N, n);
    mpz_class left;
    mpz_class right;
    mpz_bin_uiui(left.get_mpz_t(), M, static_cast<unsigned long>(lo));
    mpz_bin_uiui(right.get_mpz_t(), N - M, n - static_cast<unsigned long>(lo));

    const auto count = static_cast<std::size_t>(hi - lo + 1);
    numer_.reserve(count);
    cum_.reserve(count);
    mpz_class running = 0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      numer_.emplace_back(left * right);
      running += numer_.back();
      cum_.push_back(running);
      if (k == hi) break;
      // C(M, k+1) = C(M, k)(M - k)/(k + 1); C(N-M, n-k-1) = C(N-M, n-k)(n - k)/(N - M - n + k + 1).
      left *= static_cast<unsigned long>(static_cast<std::int64_t>(M) - k);
      mpz_divexact_ui(left.get_mpz_t(), left.get_mpz_t(),
                      static_cast<unsigned long>(k + 1));
      right *= static_cast<unsigned long>(static_cast<std::int64_t>(n) - k);
      mpz_divexact_ui(right.get_mpz_t(), right.get_mpz_t(),
                      static_cast<unsigned long>(static_cast<std::int64_t>(N - M - n) + k + 1));
    }

    pmf_.resize(count);
    cdf_.resize(count);
    sf_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      pmf_[i] = mpq_class(numer_[i], denom_).get_d();
      cdf_[i] = mpq_class(cum_[i], denom_).get_d();
      sf_[i] = mpq_class(denom_ - cum_[i], denom_).get_d();
    }
  }

  void build_logspace() {
    constexpr int kReanchorEvery = 64;
    constexpr double kNegligible = 1e-300;
    const auto n = params_.sample_size();
    const auto M = params_.marked();
    const auto N = params_.population();
    const auto lo = params_.support_min();
    const auto hi = params_.support_max();
    mode_ = hyperberry::mode(params_);

    auto anchored = [&](std::int64_t k) {
      return std::exp(detail::log_hypergeometric_pmf(k, n, M, N));
    };

    std::vector<double> right{anchored(mode_)};
    for (std::int64_t k = mode_; k < hi; ++k) {
      const double next = (k + 1 - mode_) % kReanchorEvery == 0
                              ? anchored(k + 1)
                              : right.back() * pmf_step_ratio(params_, k);
      if (next < kNegligible) break;
      right.push_back(next);
    }
    std::vector<double> left;
    double current = right.front();
    for (std::int64_t k = mode_ - 1; k >= lo; --k) {
      const double next = (mode_ - k) % kReanchorEvery == 0
                              ? anchored(k)
                              : current / pmf_step_ratio(params_, k);
      if (next < kNegligible) break;
      left.push_back(next);
      current = next;
    }

    window_lo_ = mode_ - static_cast<std::int64_t>(left.size());
    pmf_.assign(left.rbegin(), left.rend());
    pmf_.insert(pmf_.end(), right.begin(), right.end());

    const std::size_t count = pmf_.size();
    const std::size_t mode_index = index(mode_);
    cdf_.assign(count, 0.0);
    sf_.assign(count, 0.0);
    double below = 0.0;
    for (std::size_t i = 0; i < mode_index; ++i) {
      below += pmf_[i];
      cdf_[i] = below;
      sf_[i] = 1.0 - below;
    }
    double above = 0.0;
    for (std::size_t i = count; i-- > mode_index;) {
      sf_[i] = above;
      cdf_[i] = 1.0 - above;
      above += pmf_[i];
    }
  }

  HypParams params_;
  Backend backend_;
  std::int64_t mode_ = 0;
  std::int64_t window_lo_ = 0;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> sf_;
  // Rational backend only.
  mpz_class denom_;
  std::vector<mpz_class> numer_;
  std::vector<mpz_class> cum_;
};

/// P(X = k). Zero outside the support.
inline ExactProb pmf_exact(const HypParams& params, std::int64_t k) {
  const Backend backend = default_backend(params);
  if (!params.in_support(k)) return ExactProb::zero(backend);
  if (backend == Backend::rational) {
    const auto n = static_cast<unsigned long>(params.sample_size());
    const auto M = static_cast<unsigned long>(params.marked());
    const auto N = static_cast<unsigned long>(params.population());
    const auto ku = static_cast<unsigned long>(k);
    mpz_class a, b, c;
    mpz_bin_uiui(a.get_mpz_t(), M, ku);
    mpz_bin_uiui(b.get_mpz_t(), N - M, n - ku);
    mpz_bin_uiui(c.get_mpz_t(), N, n);
    return ExactProb::rational(mpq_class(a * b, c));
  }
  return ExactProb::logspace(detail::log_hypergeometric_pmf(
      k, params.sample_size(), params.marked(), params.population()));
}

/// P(X <= k).
inline ExactProb cdf_exact(const HypParams& params, std::int64_t k) {
  if (k < params.support_min()) return ExactProb::zero(default_backend(params));
  return Distribution(params).cdf_exact(k);
}

/// P(X > k).
inline ExactProb sf_exact(const HypParams& params, std::int64_t k) {
  if (k >= params.support_max()) return ExactProb::zero(default_backend(params));
  return Distribution(params).sf_exact(k);
}

}  // namespace hyperberry
