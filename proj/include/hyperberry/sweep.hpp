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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hyperberry/bounds.hpp"
#include "hyperberry/params.hpp"

namespace hyperberry {

/// How a grid assigns p (or f) to a population size N.
struct ValueRule {
  enum class Kind { list, constant, powerlaw };
  Kind kind = Kind::constant;
  std::vector<double> values;  // list: every entry; constant: values[0]
  double exponent = 0.0;       // powerlaw: scale * N^(-exponent)
  double scale = 1.0;

  static ValueRule constant(double v) { return {Kind::constant, {v}, 0.0, 1.0}; }
  static ValueRule list(std::vector<double> vs) { return {Kind::list, std::move(vs), 0.0, 1.0}; }
  static ValueRule powerlaw(double exponent, double scale = 1.0) {
    return {Kind::powerlaw, {}, exponent, scale};
  }

  std::vector<double> at(std::int64_t population) const {
    switch (kind) {
      case Kind::list: return values;
      case Kind::constant: return {values.at(0)};
      case Kind::powerlaw:
        return {scale * std::pow(static_cast<double>(population), -exponent)};
    }
    return {};
  }

  std::string describe() const;
};

/// Shortest decimal (up to 17 digits) that reads back as the same double.
inline std::string format_number(double v) {
  for (int digits = 1; digits <= 17; ++digits) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    if (std::stod(os.str()) == v) return os.str();
  }
  return std::to_string(v);
}

inline std::string ValueRule::describe() const {
  std::string out;
  switch (kind) {
    case Kind::constant: return "constant " + format_number(values.at(0));
    case Kind::powerlaw:
      out = "powerlaw exponent=" + format_number(exponent);
      if (scale != 1.0) out += " scale=" + format_number(scale);
      return out;
    case Kind::list:
      out = "list ";
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_number(values[i]);
      }
      return out;
  }
  return out;
}

/// Integer realization of a nominal ratio: max(1, min(N - 1, round(ratio N))).
inline std::int64_t realize_count(double ratio, std::int64_t population) {
  const auto raw = std::llround(ratio * static_cast<double>(population));
  return std::clamp<std::int64_t>(raw, 1, population - 1);
}

struct GridInstance {
  std::size_t id = 0;
  HypParams params;
  double nominal_p = 0.0;
  double nominal_f = 0.0;
};

/**
 * A declarative family of parameter triples.
 *
 * Instances are enumerated with N outermost, then p, then f, each in the
 * order given; filters are applied afterwards and ids are assigned
 * consecutively to the survivors.
 */
struct SweepGrid {
  std::string name;
  std::vector<std::int64_t> populations;
  ValueRule proportion = ValueRule::constant(0.5);
  ValueRule fraction = ValueRule::constant(0.5);
  double min_sigma = 0.0;
  bool require_gate = false;

  std::vector<GridInstance> instances() const {
    std::vector<GridInstance> out;
    for (const auto N : populations) {
      if (N < 2) throw invalid_params("grid population must be >= 2");
      for (const double p : proportion.at(N)) {
        for (const double f : fraction.at(N)) {
          HypParams params(realize_count(f, N), realize_count(p, N), N);
          if (params.sigma() < min_sigma) continue;
          if (require_gate && !bound_profile(params).gate_ok) continue;
          out.push_back({out.size(), params, p, f});
        }
      }
    }
    return out;
  }

  /// Canonical one-line description, recorded with calibrated constants.
  std::string describe() const {
    std::string out = "name=" + name + "; N=";
    for (std::size_t i = 0; i < populations.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(populations[i]);
    }
    out += "; p=" + proportion.describe() + "; f=" + fraction.describe();
    out += "; min_sigma=" + format_number(min_sigma);
    out += std::string("; require_gate=") + (require_gate ? "true" : "false");
    return out;
  }
};

/// Instances at even positions (0, 2, ...) and at odd positions.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split_alternating(const std::vector<T>& all) {
  std::pair<std::vector<T>, std::vector<T>> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (i % 2 == 0 ? out.first : out.second).push_back(all[i]);
  }
  return out;
}

/// Worker count from HYPERBERRY_THREADS; 0 or unset means one per core.
inline unsigned sweep_threads() {
  unsigned requested = 0;
  if (const char* env = std::getenv("HYPERBERRY_THREADS")) {
    requested = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

/**
 * Evaluates fn(i) for i in [0, count) on a small thread pool and returns the
 * results indexed by i, so the output order never depends on scheduling.
 * The first exception thrown by any task is rethrown.
 */
template <class Fn>
auto parallel_map(std::size_t count, Fn fn, unsigned threads = sweep_threads())
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace hyperberry
