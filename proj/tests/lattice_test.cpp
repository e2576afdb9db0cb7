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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperberry/gaussian.hpp"
#include "hyperberry/lattice.hpp"
#include "oracles.hpp"

namespace hb = hyperberry;

namespace {

double simpson_abs_phi_dd(double lo, double hi) {
  auto f = [](double x) { return std::abs(hb::normal_pdf_second_derivative(x)); };
  double total = 0.0;
  double left = lo;
  for (const double cut : {-1.0, 1.0}) {
    if (cut > left && cut < hi) {
      bool ok = false;
      total += oracle::simpson_converged(f, left, cut, 1e-13, &ok);
      EXPECT_TRUE(ok);
      left = cut;
    }
  }
  bool ok = false;
  total += oracle::simpson_converged(f, left, hi, 1e-13, &ok);
  EXPECT_TRUE(ok);
  return total;
}

TEST(MonotoneSum, NormalDensity) {
  const auto s = hb::monotone_sum_bound({-3.0, 0.5, 12, 0.0}, hb::normal_pdf);
  EXPECT_TRUE(s.holds());
  double sum = 0.0;
  for (int i = 0; i <= 12; ++i) sum += hb::normal_pdf(-3.0 + 0.5 * i);
  EXPECT_NEAR(s.lhs, sum, 1e-15);
  bool ok = false;
  const double integral = oracle::simpson_converged(hb::normal_pdf, -3.0, 3.0, 1e-14, &ok);
  ASSERT_TRUE(ok);
  EXPECT_NEAR(s.rhs, integral / 0.5 + 2.0 * hb::normal_pdf(0.0), 1e-12);
}

TEST(MonotoneSum, SingleTermAndConstant) {
  const auto one = hb::monotone_sum_bound({1.3, 0.7, 0, 0.0}, hb::normal_pdf);
  EXPECT_DOUBLE_EQ(one.lhs, hb::normal_pdf(1.3));
  EXPECT_DOUBLE_EQ(one.rhs, 2.0 * hb::normal_pdf(1.3));

  const double c = 0.75;
  const auto flat = hb::monotone_sum_bound({-2.0, 1.0, 9, 1.0}, [c](double) { return c; });
  EXPECT_DOUBLE_EQ(flat.lhs, 10 * c);
  EXPECT_NEAR(flat.rhs, 9 * c + 2 * c, 1e-12);
  EXPECT_TRUE(flat.holds());
}

TEST(MonotoneSum, RejectsNonUnimodal) {
  auto two_bumps = [](double x) { return hb::normal_pdf(x - 2) + hb::normal_pdf(x + 2); };
  EXPECT_THROW(hb::monotone_sum_bound({-6.0, 0.25, 48, 2.0}, two_bumps), std::invalid_argument);
  EXPECT_THROW(hb::monotone_sum_bound({-3.0, 0.5, 12, 2.0}, hb::normal_pdf), std::invalid_argument);
  EXPECT_THROW(hb::monotone_sum_bound({0.0, 0.0, 3, 0.0}, hb::normal_pdf), std::invalid_argument);
}

TEST(MonotoneSum, RandomShapes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double b = -10.0 + 20.0 * unit(rng);
    const double h = 2.0 * (1.0 - unit(rng));
    const std::int64_t k = std::uniform_int_distribution<std::int64_t>(0, 500)(rng);
    const double a = b + h * k * unit(rng);
    const double w = 0.1 + 3.0 * unit(rng);
    std::function<double(double)> g;
    switch (trial % 3) {
      case 0: g = [a](double x) { return hb::normal_pdf(x - a); }; break;
      case 1: g = [a, w](double x) { return std::max(0.0, 1.0 - std::abs(x - a) / w); }; break;
      default: g = [a, w](double x) { return std::max(0.0, w * w - (x - a) * (x - a)); }; break;
    }
    const auto s = hb::monotone_sum_bound({b, h, k, a}, g);
    ASSERT_TRUE(s.holds()) << "trial " << trial << " lhs=" << s.lhs << " rhs=" << s.rhs;
  }
}

TEST(PhiDd, ClosedFormMatchesQuadrature) {
  for (const auto& [lo, hi] : std::vector<std::pair<double, double>>{
           {-0.05, 1.05}, {-3.0, 3.0}, {4.75, 7.25}, {0.2, 0.9}, {-1.0, 1.0}, {1.2, 9.0}}) {
    EXPECT_NEAR(hb::abs_normal_second_derivative_integral(lo, hi), simpson_abs_phi_dd(lo, hi), 1e-11)
        << lo << " " << hi;
  }
  EXPECT_DOUBLE_EQ(hb::max_abs_normal_second_derivative(-1.0, 1.0), hb::normal_pdf(0.0));
  EXPECT_DOUBLE_EQ(hb::max_abs_normal_second_derivative(1.2, 5.0),
                   2.0 * hb::normal_pdf(std::sqrt(3.0)));
  EXPECT_DOUBLE_EQ(hb::max_abs_normal_second_derivative(3.0, 5.0),
                   std::abs(hb::normal_pdf_second_derivative(3.0)));
}

TEST(PhiRiemann, Examples) {
  const auto a = hb::phi_riemann_bound(0.0, 0.1, 10);
  EXPECT_TRUE(a.holds());
  double sum = 0.0;
  for (int i = 0; i <= 10; ++i) sum += hb::normal_pdf(0.1 * i);
  bool ok = false;
  const double mass = oracle::simpson_converged(hb::normal_pdf, -0.05, 1.05, 1e-15, &ok);
  ASSERT_TRUE(ok);
  EXPECT_NEAR(a.lhs, std::abs(0.1 * sum - mass), 1e-13);
  EXPECT_NEAR(a.rhs, 0.01 / 12.0 * (simpson_abs_phi_dd(-0.05, 1.05) +
                                    4.1 * hb::max_abs_normal_second_derivative(-0.05, 1.05)),
              1e-13);

  const auto tail = hb::phi_riemann_bound(5.0, 0.5, 4);
  EXPECT_TRUE(tail.holds());
  EXPECT_LT(tail.lhs, 0.5 * tail.rhs);
}

TEST(PhiRiemann, SecondOrderInStep) {
  double prev_ratio = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double h = 0.2 / (1 << j);
    const auto s = hb::phi_riemann_bound(0.3, h, 10 * (1 << j));
    ASSERT_TRUE(s.holds());
    const double ratio = s.lhs / (h * h);
    EXPECT_LT(ratio, 0.01);
    EXPECT_LE(ratio, s.rhs / (h * h));
    // The ratio settles towards its limit as h shrinks.
    if (j > 4) {
      EXPECT_NEAR(ratio, prev_ratio, 0.1 * prev_ratio);
    }
    prev_ratio = ratio;
  }
}

TEST(PhiRiemann, RandomCases) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double b = 6.0 * unit(rng);
    const double h = 1.0 - unit(rng);
    const auto j0 = std::uniform_int_distribution<std::int64_t>(1, 200)(rng);
    ASSERT_TRUE(hb::phi_riemann_bound(b, h, j0).holds()) << b << " " << h << " " << j0;
  }
}

TEST(PhiRiemann, Domain) {
  EXPECT_THROW(hb::phi_riemann_bound(-0.1, 0.1, 3), std::domain_error);
  EXPECT_THROW(hb::phi_riemann_bound(0.0, 0.0, 3), std::domain_error);
  EXPECT_THROW(hb::phi_riemann_bound(0.0, 0.1, 0), std::domain_error);
}

}  // namespace
