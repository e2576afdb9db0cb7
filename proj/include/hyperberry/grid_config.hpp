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
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperberry/sweep.hpp"

namespace hyperberry {

class config_error : public std::invalid_argument {
 public:
  config_error(int line, const std::string& what)
      : std::invalid_argument("grid config line " + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Splits on commas and whitespace.
inline std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double to_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw config_error(line, "not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw config_error(line, "not a number: '" + s + "'");
  return v;
}

/// Integers may be written as 1e6 but must be exact.
inline std::int64_t to_count(const std::string& s, int line) {
  const double v = to_double(s, line);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw config_error(line, "not an integer: '" + s + "'");
  }
  return static_cast<std::int64_t>(v);
}

inline std::vector<std::int64_t> parse_populations(const std::vector<std::string>& t, int line) {
  std::vector<std::int64_t> out;
  if (t.empty()) throw config_error(line, "N needs a value");
  if (t[0] == "range") {
    if (t.size() != 4) throw config_error(line, "expected: N = range <start> <stop> <step>");
    const auto start = to_count(t[1], line), stop = to_count(t[2], line), step = to_count(t[3], line);
    if (step <= 0) throw config_error(line, "range step must be positive");
    for (auto v = start; v <= stop; v += step) out.push_back(v);
  } else if (t[0] == "geometric") {
    if (t.size() != 4) throw config_error(line, "expected: N = geometric <start> <stop> <factor>");
    const auto start = to_count(t[1], line), stop = to_count(t[2], line), factor = to_count(t[3], line);
    if (factor < 2 || start < 1) throw config_error(line, "geometric needs start >= 1, factor >= 2");
    for (auto v = start; v <= stop; v *= factor) out.push_back(v);
  } else {
    const std::size_t first = t[0] == "list" ? 1 : 0;
    for (std::size_t i = first; i < t.size(); ++i) out.push_back(to_count(t[i], line));
  }
  if (out.empty()) throw config_error(line, "N list is empty");
  return out;
}

inline ValueRule parse_rule(const std::vector<std::string>& t, int line) {
  if (t.empty()) throw config_error(line, "rule needs a value");
  if (t[0] == "constant") {
    if (t.size() != 2) throw config_error(line, "expected: constant <value>");
    return ValueRule::constant(to_double(t[1], line));
  }
  if (t[0] == "powerlaw") {
    double exponent = NAN;
    double scale = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      const auto eq = t[i].find('=');
      if (eq == std::string::npos) throw config_error(line, "expected key=value, got '" + t[i] + "'");
      const std::string key = t[i].substr(0, eq);
      const double v = to_double(t[i].substr(eq + 1), line);
      if (key == "a" || key == "b" || key == "exponent") {
        exponent = v;
      } else if (key == "scale") {
        scale = v;
      } else {
        throw config_error(line, "unknown powerlaw key '" + key + "'");
      }
    }
    if (std::isnan(exponent)) throw config_error(line, "powerlaw needs an exponent (a=, b= or exponent=)");
    return ValueRule::powerlaw(exponent, scale);
  }
  const std::size_t first = t[0] == "list" ? 1 : 0;
  std::vector<double> vs;
  for (std::size_t i = first; i < t.size(); ++i) vs.push_back(to_double(t[i], line));
  if (vs.empty()) throw config_error(line, "list is empty");
  return ValueRule::list(std::move(vs));
}

inline bool to_bool(const std::string& s, int line) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw config_error(line, "not a boolean: '" + s + "'");
}

}  // namespace detail

/**
 * Reads a grid from flat `key = value` lines; `#` starts a comment.
 *
 *   name = gate
 *   N = 20000, 50000, 100000         # or: range 100 2000 100 | geometric 1e4 1e7 10
 *   p = list 0.05, 0.1, 0.3, 0.5     # or: constant 0.5 | powerlaw b=0.6 [scale=1]
 *   f = powerlaw a=0.6
 *   min_sigma = 3
 *   require_gate = true
 *
 * N is required; p and f default to constant 0.5.
 */
inline SweepGrid parse_grid(const std::string& text) {
  SweepGrid grid;
  bool have_n = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string body = detail::trim(raw);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw config_error(line, "expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    const auto t = detail::tokens(value);
    if (key == "name") {
      grid.name = value;
    } else if (key == "N") {
      grid.populations = detail::parse_populations(t, line);
      have_n = true;
    } else if (key == "p") {
      grid.proportion = detail::parse_rule(t, line);
    } else if (key == "f") {
      grid.fraction = detail::parse_rule(t, line);
    } else if (key == "min_sigma") {
      if (t.size() != 1) throw config_error(line, "min_sigma takes one number");
      grid.min_sigma = detail::to_double(t[0], line);
    } else if (key == "require_gate") {
      if (t.size() != 1) throw config_error(line, "require_gate takes one boolean");
      grid.require_gate = detail::to_bool(t[0], line);
    } else {
      throw config_error(line, "unknown key '" + key + "'");
    }
  }
  if (!have_n) throw config_error(line, "missing N");
  return grid;
}

inline SweepGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read grid config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

}  // namespace hyperberry
