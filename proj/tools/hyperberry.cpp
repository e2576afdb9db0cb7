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


// Command-line front end. Exit codes: 0 ok, 1 invalid input or config,
// 2 gate refusal, 3 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperberry/hyperberry.hpp"

namespace hb = hyperberry;
using nlohmann::json;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitGate = 2;
constexpr int kExitVerify = 3;

struct Options {
  std::int64_t n = 0;
  std::int64_t M = 0;
  std::int64_t N = 0;
  std::int64_t k = 0;
  double delta = hb::kDefaultExpansionWindow;
  std::vector<double> x;
  std::string backend = "auto";
  std::string constants;
  std::string grid;
  std::vector<std::string> train_grids;
  std::vector<std::string> gated_grids;
  std::string half = "all";
  std::string out;
  std::string format = "text";
  bool no_timestamp = false;
};

class verification_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

hb::Backend pick_backend(const Options& o, const hb::HypParams& params) {
  if (o.backend == "rational") return hb::Backend::rational;
  if (o.backend == "logspace") return hb::Backend::logspace;
  return hb::default_backend(params);
}

hb::ConstantSet constants_for(const Options& o) {
  return o.constants.empty() ? hb::reference_constants() : hb::load_constants(o.constants);
}

/// Writes to --out when given, stdout otherwise.
void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw std::invalid_argument("cannot write " + o.out);
  f << text;
}

std::string fmt(double v) { return hb::format_decimal(v); }

int cmd_point(const Options& o, bool cumulative) {
  const hb::HypParams params(o.n, o.M, o.N);
  const hb::Distribution dist(params, pick_backend(o, params));
  const hb::ExactProb v = cumulative ? dist.cdf_exact(o.k) : dist.pmf_exact(o.k);
  if (o.format == "json") {
    json j{{"n", o.n}, {"M", o.M}, {"N", o.N}, {"k", o.k},
           {"backend", hb::to_string(dist.backend())},
           {cumulative ? "cdf" : "pmf", v.to_string()}, {"decimal", v.value()}};
    emit(o, j.dump(2) + "\n");
  } else {
    emit(o, v.to_string() + "\n");
  }
  return 0;
}

int cmd_certify(const Options& o) {
  const hb::HypParams params(o.n, o.M, o.N);
  const hb::CertifiedProb c = hb::certified_pmf(params, o.k, o.delta);
  if (o.format == "json") {
    json j{{"n", o.n}, {"M", o.M}, {"N", o.N}, {"k", o.k}, {"delta", o.delta},
           {"log_main", c.log_main}, {"remainder_bound", c.remainder_bound},
           {"value", c.value}, {"lower", c.lower}, {"upper", c.upper}};
    emit(o, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "log_main=" << fmt(c.log_main) << "\n"
       << "remainder_bound=" << fmt(c.remainder_bound) << "\n"
       << "value=" << fmt(c.value) << "\n"
       << "enclosure=[" << fmt(c.lower) << ", " << fmt(c.upper) << "]\n";
    emit(o, os.str());
  }
  return 0;
}

int cmd_bound(const Options& o) {
  const hb::HypParams params(o.n, o.M, o.N);
  const hb::BoundProfile b = hb::bound_profile(params);
  const hb::ConstantSet consts = constants_for(o);
  const hb::BoundValue uniform = hb::uniform_bound(params, consts);
  json evals = json::array();
  std::ostringstream os;
  os << "folded_fraction=" << fmt(b.folded_fraction) << "\n"
     << "a1=" << fmt(b.growth_coefficient) << "\n"
     << "delta=" << fmt(b.delta) << "\n"
     << "sigma=" << fmt(b.sigma) << "\n"
     << "gate_ok=" << (b.gate_ok ? "true" : "false") << "\n"
     << "uniform_bound=" << fmt(uniform.value) << " (" << hb::to_string(uniform.provenance) << ")\n";
  for (const double x : o.x) {
    // Refuses with exit code 2 when the gate fails.
    const hb::BoundValue nu = hb::nonuniform_bound(params, x, consts);
    os << "nonuniform_bound(x=" << fmt(x) << ")=" << fmt(nu.value) << " ("
       << hb::to_string(nu.provenance) << ")\n";
    json e{{"x", x}, {"nonuniform_bound", nu.value}, {"nonuniform_provenance", hb::to_string(nu.provenance)}};
    if (x > 0.0) {
      const hb::BoundValue t = hb::tail_bound(params, x, consts);
      os << "tail_bound(x=" << fmt(x) << ")=" << fmt(t.value) << " (" << hb::to_string(t.provenance) << ")\n";
      e["tail_bound"] = t.value;
      e["tail_provenance"] = hb::to_string(t.provenance);
    }
    evals.push_back(e);
  }
  if (o.format == "json") {
    json j{{"n", o.n}, {"M", o.M}, {"N", o.N},
           {"folded_fraction", b.folded_fraction}, {"a1", b.growth_coefficient},
           {"delta", b.delta}, {"sigma", b.sigma}, {"gate_ok", b.gate_ok},
           {"uniform_bound", uniform.value}, {"uniform_provenance", hb::to_string(uniform.provenance)},
           {"evaluations", evals}};
    emit(o, j.dump(2) + "\n");
  } else {
    emit(o, os.str());
  }
  return 0;
}

int cmd_delta(const Options& o) {
  const hb::HypParams params(o.n, o.M, o.N);
  const hb::Distribution dist(params, pick_backend(o, params));
  const hb::DeltaReport r = hb::delta_exact(dist);
  if (o.format == "json") {
    json j{{"n", o.n}, {"M", o.M}, {"N", o.N}, {"backend", hb::to_string(r.backend)},
           {"delta_sup", r.delta_sup}, {"argmax_k", r.argmax_k}, {"side", hb::to_string(r.side)},
           {"delta_times_sigma", r.delta_times_sigma}};
    json stars = json::array();
    for (const double x : o.x) stars.push_back({{"x", x}, {"delta_star", hb::delta_star_at(dist, x)}});
    if (!o.x.empty()) j["delta_star"] = stars;
    emit(o, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "delta_sup=" << fmt(r.delta_sup) << "\n"
       << "argmax_k=" << r.argmax_k << "\n"
       << "side=" << hb::to_string(r.side) << "\n"
       << "delta_times_sigma=" << fmt(r.delta_times_sigma) << "\n"
       << "backend=" << hb::to_string(r.backend) << "\n";
    for (const double x : o.x) os << "delta_star(x=" << fmt(x) << ")=" << fmt(hb::delta_star_at(dist, x)) << "\n";
    emit(o, os.str());
  }
  return 0;
}

hb::SweepGrid require_grid(const Options& o) {
  if (o.grid.empty()) throw std::invalid_argument("--grid is required for this command");
  return hb::load_grid(o.grid);
}

int cmd_sweep(const Options& o) {
  const hb::SweepGrid grid = require_grid(o);
  const hb::ConstantSet consts = constants_for(o);
  const auto rows = hb::run_sweep(grid, consts);
  std::ostringstream os;
  if (o.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json j{{"instance_id", r.instance_id}, {"n", r.params.sample_size()}, {"M", r.params.marked()},
             {"N", r.params.population()}, {"sigma", r.params.sigma()}, {"gate_ok", r.profile.gate_ok},
             {"delta_param", r.profile.delta}, {"uniform_bound", r.uniform_bound}};
      if (r.delta) j["delta_r"] = *r.delta;
      if (r.delta_times_sigma) j["delta_times_sigma"] = *r.delta_times_sigma;
      if (r.max_nonuniform_violation) j["max_nonuniform_violation"] = *r.max_nonuniform_violation;
      if (r.tail_bound_at_3) j["tail_bound_at_3"] = *r.tail_bound_at_3;
      arr.push_back(j);
    }
    json doc{{"grid", grid.describe()}, {"rows", arr}};
    if (!o.no_timestamp) doc["generated_at"] = utc_timestamp();
    os << doc.dump(2) << "\n";
  } else {
    if (!o.no_timestamp) os << "# generated " << utc_timestamp() << "\n";
    hb::write_sweep_csv(os, rows);
  }
  emit(o, os.str());
  return 0;
}

std::vector<hb::HypParams> select_half(const hb::SweepGrid& grid, const std::string& half) {
  std::vector<hb::HypParams> all;
  for (const auto& inst : grid.instances()) all.push_back(inst.params);
  if (half == "all") return all;
  auto [even, odd] = hb::split_alternating(all);
  return half == "even" ? even : odd;
}

int cmd_calibrate(const Options& o) {
  std::vector<hb::HypParams> uniform;
  std::vector<hb::HypParams> gated;
  std::string descriptor;
  for (const auto& path : o.train_grids) {
    const hb::SweepGrid g = hb::load_grid(path);
    for (const auto& p : select_half(g, o.half)) uniform.push_back(p);
    descriptor += (descriptor.empty() ? "" : " | ") + g.describe();
  }
  const auto& gated_paths = o.gated_grids.empty() ? o.train_grids : o.gated_grids;
  for (const auto& path : gated_paths) {
    const hb::SweepGrid g = hb::load_grid(path);
    for (const auto& p : select_half(g, o.half)) {
      if (hb::bound_profile(p).gate_ok) gated.push_back(p);
    }
    if (!o.gated_grids.empty()) descriptor += " | gated: " + g.describe();
  }
  if (o.half != "all") descriptor += " | half=" + o.half;
  hb::ConstantSet c = hb::calibrate_constants(uniform, gated, descriptor);
  if (!o.no_timestamp) c.calibrated_at = utc_timestamp();
  emit(o, hb::dump_constants(c));
  return 0;
}

/// Default grid for `verify` when none is given: small enough for the rational backend.
hb::SweepGrid default_verify_grid() {
  hb::SweepGrid g;
  g.name = "verify-default";
  g.populations = {50, 100, 200, 500, 1000};
  g.proportion = hb::ValueRule::list({0.05, 0.1, 0.3, 0.5});
  g.fraction = hb::ValueRule::list({0.05, 0.1, 0.3, 0.5});
  return g;
}

int cmd_verify(const Options& o) {
  const hb::SweepGrid grid = o.grid.empty() ? default_verify_grid() : hb::load_grid(o.grid);
  const hb::ConstantSet consts = constants_for(o);
  const auto instances = grid.instances();
  std::vector<std::string> failed;
  std::ostringstream os;
  auto record = [&](const std::string& name, std::size_t violations, const std::string& detail) {
    os << (violations == 0 ? "PASS " : "FAIL ") << name << ": " << violations << " violations"
       << (detail.empty() ? "" : "; " + detail) << "\n";
    if (violations) failed.push_back(name);
  };

  struct Check {
    std::size_t mode = 0, backend = 0, enclosure = 0, uniform = 0, nonuniform = 0, tail = 0;
    std::size_t gated = 0, rational = 0;
  };
  const auto checks = hb::parallel_map(instances.size(), [&](std::size_t i) {
    const hb::HypParams& p = instances[i].params;
    Check c;
    const hb::Distribution dist(p);
    if (dist.backend() == hb::Backend::rational) {
      ++c.rational;
      std::int64_t argmax = dist.support_min();
      for (auto k = dist.support_min(); k <= dist.support_max(); ++k) {
        if (dist.numerator(k) > dist.numerator(argmax)) argmax = k;
      }
      if (dist.numerator(argmax) != dist.numerator(dist.mode())) ++c.mode;
      const hb::Distribution logspace(p, hb::Backend::logspace);
      for (auto k = dist.support_min(); k <= dist.support_max(); ++k) {
        if (std::abs(dist.cdf(k) - logspace.cdf(k)) > hb::kLogspaceErrorBudget) ++c.backend;
        const auto gate = hb::check_applicability(p, k, hb::kDefaultExpansionWindow);
        if (!gate.all()) continue;
        const auto cert = hb::certified_pmf(p, k);
        const double exact = dist.pmf(k);
        if (exact < cert.lower || exact > cert.upper) ++c.enclosure;
      }
    }
    const double ds = hb::delta_exact(dist).delta_times_sigma;
    if (ds > consts.c(1)) ++c.uniform;
    if (hb::bound_profile(p).gate_ok) {
      ++c.gated;
      if (hb::max_nonuniform_violation(dist, consts) > 0.0) ++c.nonuniform;
      for (const double x : {0.5, 1.0, 2.0, 3.0, 5.0}) {
        if (hb::two_sided_tail(dist, x) > hb::tail_bound(p, x, consts).value) ++c.tail;
      }
    }
    return c;
  });
  Check total;
  for (const auto& c : checks) {
    total.mode += c.mode;
    total.backend += c.backend;
    total.enclosure += c.enclosure;
    total.uniform += c.uniform;
    total.nonuniform += c.nonuniform;
    total.tail += c.tail;
    total.gated += c.gated;
    total.rational += c.rational;
  }
  std::vector<hb::HypParams> rational;
  for (const auto& inst : instances) {
    if (hb::default_backend(inst.params) == hb::Backend::rational) rational.push_back(inst.params);
  }
  const hb::DualityReport duality = hb::duality_suite(rational);

  const std::string n_rational = std::to_string(total.rational) + " rational instances";
  record("mode_is_argmax", total.mode, n_rational);
  record("backend_agreement", total.backend, n_rational);
  record("certified_enclosure", total.enclosure, n_rational);
  record("duality", duality.leftover_violations + duality.reflect_violations + duality.delta_violations,
         std::to_string(duality.points_checked) + " points");
  record("uniform_bound", total.uniform, std::to_string(instances.size()) + " instances");
  record("nonuniform_bound", total.nonuniform, std::to_string(total.gated) + " gate-passing instances");
  record("tail_bound", total.tail, std::to_string(total.gated) + " gate-passing instances");
  emit(o, os.str());
  if (!failed.empty()) {
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
    throw verification_failure("verification failed: " + names);
  }
  return 0;
}

void add_params(CLI::App* cmd, Options& o, bool with_k) {
  cmd->add_option("--n", o.n, "sample size")->required();
  cmd->add_option("--M", o.M, "marked items in the population")->required();
  cmd->add_option("--N", o.N, "population size")->required();
  if (with_k) cmd->add_option("--k", o.k, "lattice point")->required();
}

void add_format(CLI::App* cmd, Options& o, std::vector<std::string> allowed) {
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember(std::move(allowed)));
  cmd->add_option("--out", o.out, "write to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact hypergeometric probabilities, normal approximation bounds and sweeps"};
  app.require_subcommand(1);
  Options o;

  auto* pmf = app.add_subcommand("pmf", "P(X = k), exact");
  add_params(pmf, o, true);
  pmf->add_option("--backend", o.backend)->check(CLI::IsMember({"auto", "rational", "logspace"}));
  add_format(pmf, o, {"text", "json"});

  auto* cdf = app.add_subcommand("cdf", "P(X <= k), exact");
  add_params(cdf, o, true);
  cdf->add_option("--backend", o.backend)->check(CLI::IsMember({"auto", "rational", "logspace"}));
  add_format(cdf, o, {"text", "json"});

  auto* certify = app.add_subcommand("certify", "certified enclosure of P(X = k)");
  add_params(certify, o, true);
  certify->add_option("--delta", o.delta, "expansion window in (0, 1/2]");
  add_format(certify, o, {"text", "json"});

  auto* bound = app.add_subcommand("bound", "bound profile and bound evaluations");
  add_params(bound, o, false);
  bound->add_option("--x", o.x, "evaluate the non-uniform and tail bounds here");
  bound->add_option("--constants", o.constants, "ConstantSet JSON (default: built-in reference)");
  add_format(bound, o, {"text", "json"});

  auto* delta = app.add_subcommand("delta", "exact Kolmogorov distance to the normal");
  add_params(delta, o, false);
  delta->add_option("--x", o.x, "also report the signed deviation at these x");
  delta->add_option("--backend", o.backend)->check(CLI::IsMember({"auto", "rational", "logspace"}));
  add_format(delta, o, {"text", "json"});

  auto* sweep = app.add_subcommand("sweep", "one CSV row per grid instance");
  sweep->add_option("--grid", o.grid, "grid config")->required();
  sweep->add_option("--constants", o.constants, "ConstantSet JSON (default: built-in reference)");
  sweep->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp header");
  o.format = "csv";
  add_format(sweep, o, {"csv", "json"});

  auto* calibrate = app.add_subcommand("calibrate", "fit C1..C6 on a training grid");
  calibrate->add_option("--grid", o.train_grids, "grid(s) for C1, C2 (and C3..C6 unless --gated-grid)")
      ->required();
  calibrate->add_option("--gated-grid", o.gated_grids, "separate grid(s) for C3..C6");
  calibrate->add_option("--half", o.half, "train on even/odd positions or all")
      ->check(CLI::IsMember({"all", "even", "odd"}));
  calibrate->add_flag("--no-timestamp", o.no_timestamp, "leave calibrated_at empty");
  calibrate->add_option("--out", o.out, "write to this file instead of stdout");

  auto* verify = app.add_subcommand("verify", "property suite; exit 3 on any violation");
  verify->add_option("--grid", o.grid, "grid config (default: small rational grid)");
  verify->add_option("--constants", o.constants, "ConstantSet JSON (default: built-in reference)");
  verify->add_option("--out", o.out, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }
  // The sweep default is csv; every other command defaults to text.
  if (!sweep->parsed() && o.format == "csv") o.format = "text";

  try {
    if (pmf->parsed()) return cmd_point(o, false);
    if (cdf->parsed()) return cmd_point(o, true);
    if (certify->parsed()) return cmd_certify(o);
    if (bound->parsed()) return cmd_bound(o);
    if (delta->parsed()) return cmd_delta(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (calibrate->parsed()) return cmd_calibrate(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const hb::gate_refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitGate;
  } catch (const verification_failure& e) {
    std::cerr << e.what() << "\n";
    return kExitVerify;
  } catch (const hb::calibration_error& e) {
    std::cerr << "calibration failed: " << e.what() << "\n";
    return kExitVerify;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
