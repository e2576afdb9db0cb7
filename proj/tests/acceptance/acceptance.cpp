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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and grids are fixed here and nowhere else.

#include <gmpxx.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hyperberry/hyperberry.hpp"
#include "oracles.hpp"

namespace hb = hyperberry;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

hb::SweepGrid small_grid() {
  hb::SweepGrid g;
  g.name = "small";
  g.populations = {50, 100, 200, 500, 1000, 2000};
  g.proportion = hb::ValueRule::list({0.05, 0.1, 0.3, 0.5});
  g.fraction = hb::ValueRule::list({0.05, 0.1, 0.3, 0.5});
  return g;
}

hb::SweepGrid gate_grid() {
  hb::SweepGrid g = small_grid();
  g.name = "gate";
  g.populations = {20000, 50000, 100000, 200000, 500000, 1000000};
  g.require_gate = true;
  return g;
}

std::vector<hb::HypParams> params_of(const hb::SweepGrid& g) {
  std::vector<hb::HypParams> out;
  for (const auto& i : g.instances()) out.push_back(i.params);
  return out;
}

std::vector<hb::HypParams> trajectory(double exponent) {
  hb::SweepGrid g;
  g.populations = {10000, 100000, 1000000, 10000000};
  g.proportion = hb::ValueRule::powerlaw(exponent);
  g.fraction = hb::ValueRule::powerlaw(exponent);
  return params_of(g);
}

// 1. Certified enclosure of the exact pmf.
Outcome certified_enclosure() {
  const auto instances = params_of(small_grid());
  struct Count {
    std::size_t checks = 0, violations = 0;
  };
  const auto counts = hb::parallel_map(instances.size(), [&](std::size_t i) {
    const hb::HypParams& p = instances[i];
    Count c;
    const hb::Distribution d(p, hb::Backend::rational);
    for (const double delta : {0.05, 0.25, 0.5}) {
      for (auto k = p.support_min(); k <= p.support_max(); ++k) {
        const auto gate = hb::check_applicability(p, k, delta);
        if (!gate.min_expected_count) break;
        if (!gate.all()) continue;
        const auto cert = hb::certified_pmf(p, k, delta);
        const mpq_class exact = d.pmf_exact(k).exact();
        ++c.checks;
        // A large remainder bound can push the upper end past double range.
        const bool above = std::isfinite(cert.upper) && exact > mpq_class(cert.upper);
        if (exact < mpq_class(cert.lower) || above) ++c.violations;
      }
    }
    return c;
  });
  Count total;
  for (const auto& c : counts) {
    total.checks += c.checks;
    total.violations += c.violations;
  }
  const hb::HypParams spot(100, 100, 200);
  const auto cert = hb::certified_pmf(spot, 50, 0.5);
  const double exact = hb::Distribution(spot).pmf(50);
  // C(100,50)^2 / C(200,100) = 0.1124155757...; 0.112752 is the reference
  // point the enclosure must also cover.
  const bool spot_ok = std::abs(cert.remainder_bound - 2.0 / 75.0) < 1e-12 && cert.lower <= exact &&
                       exact <= cert.upper && std::abs(exact - 0.1124155757) < 1e-10 &&
                       cert.lower <= 0.112752 && 0.112752 <= cert.upper;
  return {total.violations == 0 && total.checks > 0 && spot_ok,
          std::to_string(total.violations) + " violations in " + std::to_string(total.checks) +
              " exact comparisons; spot rem_bound=" + fmt(cert.remainder_bound) + ", pmf=" + fmt(exact) +
              " in [" + fmt(cert.lower) + ", " + fmt(cert.upper) + "]"};
}

// 2. Stirling sandwich against 50-digit log-factorials.
Outcome stirling_sandwich() {
  std::size_t violations = 0;
  for (std::int64_t m = 1; m <= 500; ++m) {
    const auto eps = oracle::stirling_eps(m);
    const auto b = hb::stirling_eps_bounds(m);
    if (eps < oracle::big_float(1) / (12 * m + 1) || eps > oracle::big_float(1) / (12 * m)) ++violations;
    if (std::abs(b.lower * (12 * m + 1) - 1.0) > 1e-15 || std::abs(b.upper * 12 * m - 1.0) > 1e-15) {
      ++violations;
    }
  }
  const double eps1 = oracle::stirling_eps(1).convert_to<double>();
  const bool spot = std::abs(eps1 - 0.08106) < 1e-5 && eps1 > 1.0 / 13 && eps1 < 1.0 / 12;
  return {violations == 0 && spot,
          std::to_string(violations) + " violations for m = 1..500; eps_1=" + fmt(eps1)};
}

// 3. Uniform rate: delta*sigma trained on even positions, validated on odd.
Outcome uniform_rate() {
  hb::SweepGrid g = small_grid();
  g.min_sigma = 3.0;
  const auto all = params_of(g);
  const auto ds = hb::parallel_map(all.size(), [&](std::size_t i) { return hb::delta_exact(all[i]).delta_times_sigma; });
  const auto [train, valid] = hb::split_alternating(ds);
  const double c1 = *std::max_element(train.begin(), train.end());
  const double c2 = *std::min_element(train.begin(), train.end());
  std::size_t violations = 0;
  double worst_hi = 0.0, worst_lo = 1.0;
  for (const double v : valid) {
    if (v > c1 || v < c2) ++violations;
    worst_hi = std::max(worst_hi, v);
    worst_lo = std::min(worst_lo, v);
  }
  const double floor = *std::min_element(ds.begin(), ds.end());
  return {violations == 0 && floor >= 0.05,
          std::to_string(all.size()) + " instances; train [C2, C1] = [" + fmt(c2) + ", " + fmt(c1) +
              "]; validation range [" + fmt(worst_lo) + ", " + fmt(worst_hi) + "], " +
              std::to_string(violations) + " outside; floor " + fmt(floor) + " (need >= 0.05)"};
}

// 4. delta halves per 4x N along p = f = 1/2.
Outcome rate_realization() {
  std::vector<double> d;
  for (const std::int64_t N : {100, 400, 1600, 6400}) d.push_back(hb::delta_exact(hb::HypParams(N / 2, N / 2, N)).delta_sup);
  bool ok = true;
  double log_sum = 0.0;
  std::string ratios;
  for (std::size_t i = 1; i < d.size(); ++i) {
    const double r = d[i - 1] / d[i];
    ok = ok && r >= 1.0 && r <= 4.0;
    log_sum += std::log(r);
    ratios += (i > 1 ? ", " : "") + fmt(r);
  }
  const double gm = std::exp(log_sum / static_cast<double>(d.size() - 1));
  return {ok && gm >= 1.4 && gm <= 2.9, "ratios " + ratios + "; geometric mean " + fmt(gm) + " (need [1.4, 2.9])"};
}

struct GateSplit {
  std::vector<hb::HypParams> train, valid;
  hb::ConstantSet consts;
};

GateSplit calibrated_gate_split() {
  const auto all = params_of(gate_grid());
  GateSplit s;
  std::tie(s.train, s.valid) = hb::split_alternating(all);
  s.consts = hb::calibrate_constants(s.train, s.train, "gate grid, even positions");
  return s;
}

// 5. Non-uniform bound on validation instances plus decay at |x| = 4.
Outcome nonuniform_bound(const GateSplit& s) {
  struct Row {
    double violation, decay;
  };
  const auto rows = hb::parallel_map(s.valid.size(), [&](std::size_t i) {
    const hb::Distribution d(s.valid[i]);
    const double sup = hb::delta_exact(d).delta_sup;
    const double at4 = std::max(std::abs(hb::delta_star_at(d, 4.0)), std::abs(hb::delta_star_at(d, -4.0)));
    return Row{hb::max_nonuniform_violation(d, s.consts), at4 / sup};
  });
  std::size_t violations = 0, slow = 0;
  double worst = -1.0, worst_decay = 0.0;
  for (const auto& r : rows) {
    if (r.violation > 0.0) ++violations;
    if (r.decay > 0.01) ++slow;
    worst = std::max(worst, r.violation);
    worst_decay = std::max(worst_decay, r.decay);
  }
  return {violations == 0 && slow == 0 && !rows.empty(),
          "C3=" + fmt(s.consts.c(3)) + " C4=" + fmt(s.consts.c(4)) + " from " + std::to_string(s.train.size()) +
              " training instances; " + std::to_string(violations) + " violating of " +
              std::to_string(rows.size()) + " validation instances (max excess " + fmt(worst) +
              "); max |D*(+-4)|/sup " + fmt(worst_decay) + " (need <= 0.01)"};
}

// 6. Two-sided tail inequality.
Outcome tail_inequality(const GateSplit& s) {
  const auto counts = hb::parallel_map(s.valid.size(), [&](std::size_t i) {
    const hb::Distribution d(s.valid[i]);
    std::size_t v = 0;
    for (const double x : {0.5, 1.0, 2.0, 3.0, 5.0}) {
      if (hb::two_sided_tail(d, x) > hb::tail_bound(s.valid[i], x, s.consts).value) ++v;
    }
    return v;
  });
  std::size_t violations = 0;
  for (const auto c : counts) violations += c;
  return {violations == 0 && !counts.empty(),
          "C5=" + fmt(s.consts.c(5)) + " C6=" + fmt(s.consts.c(6)) + "; " + std::to_string(violations) +
              " violations over " + std::to_string(5 * counts.size()) + " (instance, x) pairs"};
}

// 7. CLT necessity and sufficiency along power-law trajectories.
Outcome clt_necessity() {
  const auto nec = hb::clt_experiment(trajectory(0.6));
  const auto suf = hb::clt_experiment(trajectory(0.4));
  std::string nd, sd;
  for (const auto& r : nec.rows) nd += (nd.empty() ? "" : ", ") + fmt(r.delta);
  for (const auto& r : suf.rows) sd += (sd.empty() ? "" : ", ") + fmt(r.delta);
  const bool necessity = nec.min_delta >= 0.2 && nec.rows.back().delta >= 0.5 * nec.rows.front().delta;
  const bool sufficiency = suf.delta_strictly_decreasing && suf.first_to_last_ratio > 3.0;
  return {necessity && sufficiency,
          std::string("a=b=0.6 delta ") + nd + (necessity ? " (ok)" : " (FAILED)") + "; a=b=0.4 delta " + sd +
              ", first/last " + fmt(suf.first_to_last_ratio) + " (need > 3)" +
              (sufficiency ? " (ok)" : " (FAILED)")};
}

// 8. Leftover and reflection dualities on random rational instances.
Outcome duality() {
  std::mt19937_64 rng(20260101);
  std::vector<hb::HypParams> cases;
  while (cases.size() < 50) {
    const auto N = std::uniform_int_distribution<std::int64_t>(2, hb::kRationalThreshold)(rng);
    const auto M = std::uniform_int_distribution<std::int64_t>(1, N - 1)(rng);
    const auto n = std::uniform_int_distribution<std::int64_t>(1, N - 1)(rng);
    cases.emplace_back(n, M, N);
  }
  const auto r = hb::duality_suite(cases);
  return {r.ok(), std::to_string(r.leftover_violations + r.reflect_violations) + " pmf violations at " +
                      std::to_string(r.points_checked) + " support points, " +
                      std::to_string(r.delta_violations) + " delta mismatches, " + std::to_string(r.instances) +
                      " instances"};
}

// 9. Mode law and the monotonicity pattern.
Outcome mode_law() {
  std::size_t instances = 0, mode_bad = 0, stated_bad = 0, exact_bad = 0;
  std::string example;
  for (const auto& p : params_of(small_grid())) {
    ++instances;
    const hb::Distribution d(p, hb::Backend::rational);
    std::int64_t argmax = d.support_min();
    for (auto k = d.support_min(); k <= d.support_max(); ++k) {
      if (d.numerator(k) > d.numerator(argmax)) argmax = k;
    }
    if (hb::mode(p) != argmax) ++mode_bad;
    const mpz_class n = p.sample_size(), M = p.marked(), N = p.population();
    // Threshold as stated: n p - (N q + 1)/(N + 2).
    const mpq_class stated = mpq_class(n * M, N) - mpq_class(N - M + 1, N + 2);
    const mpq_class exact = hb::mode_threshold(p);
    auto pattern_ok = [&](const mpq_class& t) {
      for (auto j = d.support_min(); j < d.support_max(); ++j) {
        const int cmp = ::cmp(d.numerator(j + 1), d.numerator(j));
        const int want = ::cmp(t, mpq_class(j));  // up when j < t, flat at j == t
        if (cmp != want) return false;
      }
      return true;
    };
    if (!pattern_ok(stated)) {
      ++stated_bad;
      if (example.empty()) {
        example = p.to_string() + " stated threshold " + fmt(stated.get_d()) + " vs exact " + fmt(exact.get_d());
      }
    }
    if (!pattern_ok(exact)) ++exact_bad;
  }
  return {mode_bad == 0 && stated_bad == 0,
          std::to_string(mode_bad) + " mode != argmax of " + std::to_string(instances) +
              "; pattern vs stated threshold: " + std::to_string(stated_bad) + " mismatches" +
              (example.empty() ? "" : " (e.g. " + example + ")") +
              "; pattern vs (M+1)(n+1)/(N+2) - 1: " + std::to_string(exact_bad) + " mismatches"};
}

// Simpson estimate of int |phi''| over [lo, hi], split at the kinks.
bool stable_abs_phi_dd(double lo, double hi, double* value) {
  auto f = [](double x) { return std::abs(hb::normal_pdf_second_derivative(x)); };
  hi = std::min(hi, 40.0);
  lo = std::max(lo, -40.0);
  double total = 0.0;
  double left = lo;
  bool ok = true;
  std::vector<double> cuts;
  for (const double c : {-1.0, 1.0}) if (c > lo && c < hi) cuts.push_back(c);
  cuts.push_back(hi);
  for (const double right : cuts) {
    bool converged = false;
    if (right > left) total += oracle::simpson_converged(f, left, right, 1e-12, &converged);
    else converged = true;
    ok = ok && converged;
    left = right;
  }
  *value = total;
  return ok;
}

// 10. Lattice inequalities on random cases, after a quadrature stability gate.
Outcome lattice_inequalities() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Case3 {
    double b, h;
    std::int64_t j0;
  };
  std::vector<Case3> riemann;
  for (int i = 0; i < 1000; ++i) {
    riemann.push_back({6.0 * unit(rng), 1.0 - unit(rng), std::uniform_int_distribution<std::int64_t>(1, 200)(rng)});
  }
  // Gate: step-halving Simpson has settled below 1e-10 and agrees with the
  // closed form the bound uses.
  std::size_t unstable = 0;
  double gate_err = 0.0;
  for (const auto& c : riemann) {
    const double lo = c.b - 0.5 * c.h, hi = c.b + (static_cast<double>(c.j0) + 0.5) * c.h;
    double q = 0.0;
    if (!stable_abs_phi_dd(lo, hi, &q)) ++unstable;
    const double err = std::abs(q - hb::abs_normal_second_derivative_integral(lo, hi));
    gate_err = std::max(gate_err, err);
    if (err >= 1e-10) ++unstable;
  }
  if (unstable) {
    return {false, "quadrature gate failed on " + std::to_string(unstable) + " cases (max err " + fmt(gate_err) + ")"};
  }

  std::size_t v32 = 0;
  for (int i = 0; i < 1000; ++i) {
    const double b = -10.0 + 20.0 * unit(rng);
    const double h = 2.0 * (1.0 - unit(rng));
    const auto k = std::uniform_int_distribution<std::int64_t>(0, 500)(rng);
    const double a = b + h * static_cast<double>(k) * unit(rng);
    const double w = 0.1 + 3.0 * unit(rng);
    std::function<double(double)> g;
    switch (i % 3) {
      case 0: g = [a](double x) { return hb::normal_pdf(x - a); }; break;
      case 1: g = [a, w](double x) { return std::max(0.0, 1.0 - std::abs(x - a) / w); }; break;
      default: g = [a, w](double x) { return std::max(0.0, w * w - (x - a) * (x - a)); }; break;
    }
    if (!hb::monotone_sum_bound({b, h, k, a}, g).holds()) ++v32;
  }
  std::size_t v33 = 0;
  for (const auto& c : riemann) {
    if (!hb::phi_riemann_bound(c.b, c.h, c.j0).holds()) ++v33;
  }
  return {v32 == 0 && v33 == 0, "quadrature gate ok (max err " + fmt(gate_err) + "); monotone-sum " +
                                    std::to_string(v32) + "/1000 violations; phi-Riemann " +
                                    std::to_string(v33) + "/1000 violations"};
}

// 11. delta law and the gate.
Outcome delta_law() {
  bool ok = true;
  std::string why;
  const auto half = hb::bound_profile(hb::HypParams(100, 100, 200));
  if (half.delta != 1.0 / 22.5) ok = false, why += " delta(f=1/2) != 1/22.5;";
  for (const std::int64_t N : {9, 90, 900, 10000}) {
    for (std::int64_t n = 1; 9 * n <= 4 * N; ++n) {
      if (hb::bound_profile(hb::HypParams(n, 1, N)).delta != 1.0 / 20.0) {
        ok = false, why += " delta != 1/20 at f=" + std::to_string(n) + "/" + std::to_string(N) + ";";
        break;
      }
    }
  }
  std::size_t count = 0, gated = 0;
  hb::SweepGrid big = small_grid();
  big.populations = {50, 100, 200, 500, 1000, 2000, 20000, 50000, 100000, 200000, 500000, 1000000};
  for (const auto& p : params_of(big)) {
    ++count;
    const auto b = hb::bound_profile(p);
    if (!(b.delta > 1.0 / 25.0 && b.delta <= 1.0 / 20.0)) ok = false, why += " delta out of range " + p.to_string() + ";";
    if (b.sigma >= 25.0) {
      ++gated;
      if (!b.gate_ok) ok = false, why += " gate fails at sigma >= 25 " + p.to_string() + ";";
    }
  }
  return {ok, "delta(f=1/2)=" + fmt(half.delta) + "; " + std::to_string(count) + " instances in (1/25, 1/20], " +
                  std::to_string(gated) + " with sigma >= 25 all gate_ok" + why};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  GateSplit split;
  bool split_ready = false;
  auto gate_split = [&]() -> const GateSplit& {
    if (!split_ready) split = calibrated_gate_split(), split_ready = true;
    return split;
  };
  const std::vector<Criterion> criteria = {
      {"AC1 certified enclosure", certified_enclosure},
      {"AC2 Stirling sandwich", stirling_sandwich},
      {"AC3 uniform rate", uniform_rate},
      {"AC4 rate realization", rate_realization},
      {"AC5 non-uniform bound", [&] { return nonuniform_bound(gate_split()); }},
      {"AC6 tail inequality", [&] { return tail_inequality(gate_split()); }},
      {"AC7 CLT necessity and sufficiency", clt_necessity},
      {"AC8 duality", duality},
      {"AC9 mode law", mode_law},
      {"AC10 lattice inequalities", lattice_inequalities},
      {"AC11 delta law", delta_law},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
