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

#include "hyperberry/constants_io.hpp"
#include "hyperberry/grid_config.hpp"
#include "hyperberry/report.hpp"

namespace hb = hyperberry;

namespace {

TEST(ConstantsJson, RoundTrip) {
  hb::ConstantSet c = hb::with_proof_traced_rates(hb::reference_constants());
  c.calibrated_at = "2026-01-01T00:00:00Z";
  const std::string text = hb::dump_constants(c);
  EXPECT_EQ(hb::parse_constants(text), c);
  EXPECT_EQ(hb::dump_constants(hb::parse_constants(text)), text);
  EXPECT_NE(text.find("\"proof-traced\""), std::string::npos);
}

TEST(ConstantsJson, Rejects) {
  EXPECT_THROW(hb::parse_constants("{"), std::invalid_argument);
  EXPECT_THROW(hb::parse_constants("{\"C1\": 1}"), std::invalid_argument);
  std::string text = hb::dump_constants(hb::reference_constants());
  text.replace(text.find("\"C3\": 0.32"), 10, "\"C3\": -1.0");
  EXPECT_THROW(hb::parse_constants(text), std::invalid_argument);
}

TEST(GridConfig, ParsesEveryForm) {
  const auto g = hb::parse_grid(R"(# comment
name = demo
N = range 100 500 200     # 100, 300, 500
p = list 0.1, 0.5
f = powerlaw a=0.5 scale=2
min_sigma = 1.5
require_gate = false
)");
  EXPECT_EQ(g.name, "demo");
  EXPECT_EQ(g.populations, (std::vector<std::int64_t>{100, 300, 500}));
  EXPECT_EQ(g.proportion.kind, hb::ValueRule::Kind::list);
  EXPECT_EQ(g.fraction.kind, hb::ValueRule::Kind::powerlaw);
  EXPECT_DOUBLE_EQ(g.fraction.at(100)[0], 0.2);
  EXPECT_DOUBLE_EQ(g.min_sigma, 1.5);

  const auto geo = hb::parse_grid("N = geometric 1e4 1e7 10\np = constant 0.5\n");
  EXPECT_EQ(geo.populations, (std::vector<std::int64_t>{10000, 100000, 1000000, 10000000}));
  EXPECT_EQ(geo.fraction.kind, hb::ValueRule::Kind::constant);
  EXPECT_EQ(hb::parse_grid("N = 4 8").populations, (std::vector<std::int64_t>{4, 8}));
}

TEST(GridConfig, Errors) {
  EXPECT_THROW(hb::parse_grid("p = constant 0.5\n"), hb::config_error);
  EXPECT_THROW(hb::parse_grid("N = 100\nq = 1\n"), hb::config_error);
  EXPECT_THROW(hb::parse_grid("N = 100.5\n"), hb::config_error);
  EXPECT_THROW(hb::parse_grid("N = 100\np = powerlaw c=1\n"), hb::config_error);
  EXPECT_THROW(hb::parse_grid("N = range 1 10 0\n"), hb::config_error);
  EXPECT_THROW(hb::parse_grid("N = 100\nrequire_gate = maybe\n"), hb::config_error);
  try {
    hb::parse_grid("N = 100\n\nbogus line\n");
    FAIL();
  } catch (const hb::config_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(GridConfig, InstancesAndFilters) {
  hb::SweepGrid g = hb::parse_grid("N = 50, 2000\np = list 0.05 0.5\nf = list 0.05 0.5\nmin_sigma = 3\n");
  const auto inst = g.instances();
  for (std::size_t i = 0; i < inst.size(); ++i) {
    EXPECT_EQ(inst[i].id, i);
    EXPECT_GE(inst[i].params.sigma(), 3.0);
  }
  EXPECT_EQ(inst.front().params, hb::HypParams(1000, 100, 2000));
  g.require_gate = true;
  EXPECT_TRUE(g.instances().empty());
  const auto again = hb::parse_grid(
      "N = 50, 2000\np = list 0.05 0.5\nf = list 0.05 0.5\nmin_sigma = 3\n");
  EXPECT_EQ(again.describe(), hb::parse_grid(
      "# same grid\nN = 50 2000\np = list 0.05, 0.5\nf = list 0.05,0.5\nmin_sigma = 3\n").describe());
}

TEST(GridConfig, RoundingKeepsInvariants) {
  const auto g = hb::parse_grid("N = 10, 100\np = powerlaw b=2\nf = list 0.999\n");
  for (const auto& i : g.instances()) {
    EXPECT_EQ(i.params.marked(), 1);
    EXPECT_EQ(i.params.sample_size(), i.params.population() - 1);
  }
}

}  // namespace
