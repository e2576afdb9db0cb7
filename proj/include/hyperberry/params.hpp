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
#include <stdexcept>
#include <string>

namespace hyperberry {

/// Thrown when a parameter triple violates 1 <= M < N, 1 <= n < N.
class invalid_params : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a bound or approximation is requested outside the region
/// where it is certified. `gate()` names the condition that failed.
class gate_refusal : public std::runtime_error {
 public:
  gate_refusal(std::string gate, const std::string& detail)
      : std::runtime_error(gate + ": " + detail), gate_(std::move(gate)) {}

  const std::string& gate() const noexcept { return gate_; }

 private:
  std::string gate_;
};

/**
 * Parameters of Hyp(n; M, N): the number of marked items in a sample of
 * size n drawn without replacement from a population of N items, M of which
 * are marked.
 *
 * Construction enforces the non-degenerate region 1 <= M < N, 1 <= n < N,
 * so the marked fraction p = M/N and the sampling fraction f = n/N both lie
 * strictly inside (0, 1).
 *
 * sigma2() = N p q f (1 - f) is the scale used for standardization. It is
 * computed from the integer products M(N - M) and n(N - n), which makes it
 * bit-identical across the leftover and reflection duals.
 */
class HypParams {
 public:
  HypParams(std::int64_t sample_size, std::int64_t marked,
            std::int64_t population)
      : n_(sample_size), m_(marked), N_(population) {
    if (population < 2 || marked < 1 || marked >= population ||
        sample_size < 1 || sample_size >= population) {
      throw invalid_params("need 1 <= M < N and 1 <= n < N, got n=" +
                           std::to_string(sample_size) +
                           " M=" + std::to_string(marked) +
                           " N=" + std::to_string(population));
    }
  }

  std::int64_t sample_size() const noexcept { return n_; }
  std::int64_t marked() const noexcept { return m_; }
  std::int64_t population() const noexcept { return N_; }

  double marked_fraction() const noexcept {
    return static_cast<double>(m_) / static_cast<double>(N_);
  }
  double unmarked_fraction() const noexcept {
    return static_cast<double>(N_ - m_) / static_cast<double>(N_);
  }
  double sampling_fraction() const noexcept {
    return static_cast<double>(n_) / static_cast<double>(N_);
  }

  /// n p, the mean of X.
  double mean() const noexcept {
    return static_cast<double>(n_) * static_cast<double>(m_) /
           static_cast<double>(N_);
  }

  double sigma2() const noexcept {
    const double N = static_cast<double>(N_);
    const double marked_pairs = static_cast<double>(m_ * (N_ - m_));
    const double sample_pairs = static_cast<double>(n_ * (N_ - n_));
    return marked_pairs * sample_pairs / (N * N * N);
  }
  double sigma() const noexcept { return std::sqrt(sigma2()); }

  std::int64_t support_min() const noexcept {
    return n_ > N_ - m_ ? n_ - (N_ - m_) : 0;
  }
  std::int64_t support_max() const noexcept { return n_ < m_ ? n_ : m_; }
  bool in_support(std::int64_t k) const noexcept {
    return k >= support_min() && k <= support_max();
  }

  /// (k - n p) / sigma, computed from the integer numerator k N - n M.
  double standardized(std::int64_t k) const noexcept {
    const auto numer = static_cast<__int128>(k) * N_ -
                       static_cast<__int128>(n_) * m_;
    return static_cast<double>(numer) / (static_cast<double>(N_) * sigma());
  }

  std::string to_string() const {
    return "(n=" + std::to_string(n_) + ", M=" + std::to_string(m_) +
           ", N=" + std::to_string(N_) + ")";
  }

  friend bool operator==(const HypParams&, const HypParams&) = default;

 private:
  std::int64_t n_;
  std::int64_t m_;
  std::int64_t N_;
};

/// Y = M - X, the marked count among the N - n items left behind.
inline HypParams dual_leftover(const HypParams& params) {
  return HypParams(params.population() - params.sample_size(), params.marked(),
                   params.population());
}

/// V = n - X, the unmarked count in the sample.
inline HypParams dual_reflect(const HypParams& params) {
  return HypParams(params.sample_size(),
                   params.population() - params.marked(), params.population());
}

}  // namespace hyperberry
