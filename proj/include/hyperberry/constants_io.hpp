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

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hyperberry/bounds.hpp"

namespace hyperberry {

/// ConstantSet as JSON:
///   {"C1": ..., ..., "C6": ..., "provenance": {"C1": "calibrated", ...},
///    "grid": "...", "calibrated_at": "..."}
/// Doubles are written in shortest round-trip form, so parse(dump(c)) == c.
inline nlohmann::json to_json(const ConstantSet& consts) {
  nlohmann::json j;
  nlohmann::json prov;
  for (int i = 1; i <= 6; ++i) {
    const std::string key = "C" + std::to_string(i);
    j[key] = consts.c(i);
    prov[key] = to_string(consts.source(i));
  }
  j["provenance"] = prov;
  j["grid"] = consts.grid;
  j["calibrated_at"] = consts.calibrated_at;
  return j;
}

inline ConstantSet constants_from_json(const nlohmann::json& j) {
  ConstantSet consts;
  for (int i = 1; i <= 6; ++i) {
    const std::string key = "C" + std::to_string(i);
    const auto idx = static_cast<std::size_t>(i - 1);
    consts.values[idx] = j.at(key).get<double>();
    consts.provenance[idx] =
        provenance_from_string(j.at("provenance").at(key).get<std::string>());
  }
  consts.grid = j.value("grid", std::string{});
  consts.calibrated_at = j.value("calibrated_at", std::string{});
  consts.validate();
  return consts;
}

inline std::string dump_constants(const ConstantSet& consts) {
  return to_json(consts).dump(2) + "\n";
}

inline ConstantSet parse_constants(const std::string& text) {
  try {
    return constants_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("constants JSON: ") + e.what());
  }
}

inline ConstantSet load_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open constants file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_constants(buf.str());
}

}  // namespace hyperberry
