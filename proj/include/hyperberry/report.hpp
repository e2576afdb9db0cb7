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

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hyperberry/bounds.hpp"
#include "hyperberry/exact.hpp"
#include "hyperberry/sweep.hpp"
#include "hyperberry/verification.hpp"

namespace hyperberry {

/**
 * Constants shipped with the library, produced by `hyperberry calibrate` with
 * the default search lattice on every instance of the uniform, gate, rate
 * and sufficiency grids in grids/ (C3..C6 from the gate grid alone). The
 * same values are in data/reference_constants.json.
 */
inline ConstantSet reference_constants() {
  ConstantSet c;
  c.values = {0.26486229101788145, 0.1979808264516629, 0.32, 0.07, 0.16, 0.07};
  c.provenance.fill(Provenance::calibrated);
  c.grid = "uniform, gate, rate, sufficiency grids; gated: gate grid";
  return c;
}

/// One CSV row of a sweep. Optional fields print as empty cells.
struct SweepRow {
  std::size_t instance_id = 0;
  HypParams params;
  BoundProfile profile;
  std::optional<double> delta;
  std::optional<double> delta_times_sigma;
  double uniform_bound = 0.0;
  std::optional<double> max_nonuniform_violation;  // gate-passing instances only
  std::optional<double> tail_bound_at_3;           // gate-passing instances only
};

inline SweepRow evaluate_instance(const GridInstance& inst, const ConstantSet& consts) {
  SweepRow row{inst.id, inst.params, bound_profile(inst.params), {}, {}, 0.0, {}, {}};
  const Distribution dist(inst.params);
  try {
    const DeltaReport r = delta_exact(dist);
    row.delta = r.delta_sup;
    row.delta_times_sigma = r.delta_times_sigma;
  } catch (const gate_refusal&) {
    // Deviation below the log-space error budget: left blank.
  }
  row.uniform_bound = uniform_bound(inst.params, consts).value;
  if (row.profile.gate_ok) {
    row.max_nonuniform_violation = max_nonuniform_violation(dist, consts);
    row.tail_bound_at_3 = tail_bound(inst.params, 3.0, consts).value;
  }
  return row;
}

/// Rows in instance order, evaluated in parallel.
inline std::vector<SweepRow> run_sweep(const SweepGrid& grid, const ConstantSet& consts) {
  const auto instances = grid.instances();
  return parallel_map(instances.size(),
                      [&](std::size_t i) { return evaluate_instance(instances[i], consts); });
}

inline const char* sweep_csv_header() {
  return "instance_id,n,M,N,p,f,sigma2,sigma,delta_r,delta_times_sigma,gate_ok,delta_param,a1,"
         "uniform_bound,max_nonuniform_violation,tail_bound_at_3";
}

inline std::string sweep_csv_row(const SweepRow& row) {
  auto opt = [](const std::optional<double>& v) { return v ? format_decimal(*v) : std::string(); };
  const HypParams& p = row.params;
  std::string out = std::to_string(row.instance_id);
  out += "," + std::to_string(p.sample_size());
  out += "," + std::to_string(p.marked());
  out += "," + std::to_string(p.population());
  out += "," + format_decimal(p.marked_fraction());
  out += "," + format_decimal(p.sampling_fraction());
  out += "," + format_decimal(p.sigma2());
  out += "," + format_decimal(p.sigma());
  out += "," + opt(row.delta);
  out += "," + opt(row.delta_times_sigma);
  out += row.profile.gate_ok ? ",true" : ",false";
  out += "," + format_decimal(row.profile.delta);
  out += "," + format_decimal(row.profile.growth_coefficient);
  out += "," + format_decimal(row.uniform_bound);
  out += "," + opt(row.max_nonuniform_violation);
  out += "," + opt(row.tail_bound_at_3);
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header() << '\n';
  for (const auto& row : rows) os << sweep_csv_row(row) << '\n';
}

}  // namespace hyperberry
