// Copyright 2026 The hbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include "test_support.hpp"

namespace hbench {
namespace {

AttributeCatalog catalog(std::vector<std::size_t> levels) {
  AttributeCatalog c;
  for (std::size_t a = 0; a < levels.size(); ++a) {
    Attribute at{"t" + std::to_string(a), {}, {}};
    for (std::size_t l = 0; l < levels[a]; ++l) at.levels.push_back("L" + std::to_string(l));
    c.attributes.push_back(std::move(at));
  }
  return c;
}

// Noiseless ratings from planted part-worths over every profile of a design.
std::vector<Response> planted(const ConjointDesign& d, const std::string& sh, double alpha,
                              const std::vector<std::vector<double>>& beta, Rng* noise = nullptr,
                              double sd = 0.0) {
  std::vector<Response> out;
  for (const auto& p : d.profiles) {
    double r = alpha;
    for (std::size_t a = 0; a < beta.size(); ++a) r += beta[a][p.levels[a]];
    if (noise) r += noise->normal(0.0, sd);
    out.push_back({sh, p.id, r});
  }
  return out;
}

std::vector<std::vector<double>> random_beta(Rng& rng, const AttributeCatalog& cat) {
  std::vector<std::vector<double>> beta;
  for (const auto& a : cat.attributes) {
    std::vector<double> b(a.levels.size());
    double s = 0.0;
    for (std::size_t l = 0; l + 1 < b.size(); ++l) s += b[l] = rng.uniform(-1, 1);
    b.back() = -s;
    beta.push_back(std::move(b));
  }
  return beta;
}

double det3(const DenseMatrix& X, std::size_t r0, std::size_t r1, std::size_t r2) {
  auto a = [&](std::size_t r, std::size_t c) { return X(r, c); };
  return a(r0, 0) * (a(r1, 1) * a(r2, 2) - a(r1, 2) * a(r2, 1)) -
         a(r0, 1) * (a(r1, 0) * a(r2, 2) - a(r1, 2) * a(r2, 0)) +
         a(r0, 2) * (a(r1, 0) * a(r2, 1) - a(r1, 1) * a(r2, 0));
}

TEST(Catalog, Validation) {
  EXPECT_THROW(catalog({1}).validate(), ConfigError);
  EXPECT_THROW(AttributeCatalog{}.validate(), ConfigError);
  AttributeCatalog dup = catalog({2, 2});
  dup.attributes[1].metric_id = "t0";
  EXPECT_THROW(dup.validate(), ConfigError);
  AttributeCatalog labels = catalog({2});
  labels.attributes[0].levels = {"a", "a"};
  EXPECT_THROW(labels.validate(), ConfigError);
  AttributeCatalog desc = catalog({2});
  desc.attributes[0].descriptions = {"only one"};
  EXPECT_THROW(desc.validate(), ConfigError);
  EXPECT_EQ(catalog({3, 2}).n_columns(), 4u);
}

TEST(EffectsRow, Coding) {
  const AttributeCatalog c = catalog({3, 2});
  const std::vector<std::size_t> first{0, 0}, last{2, 1};
  EXPECT_EQ(effects_row(c, first), (std::vector<double>{1, 1, 0, 1}));
  EXPECT_EQ(effects_row(c, last), (std::vector<double>{1, -1, -1, -1}));
  const std::vector<std::size_t> bad{3, 0}, short_{0};
  EXPECT_THROW(effects_row(c, bad), UnknownIdError);
  EXPECT_THROW(effects_row(c, short_), DimensionError);
}

TEST(GenerateDesign, OneTwoLevelAttribute) {
  const ConjointDesign d = generate_design(catalog({2}), 4, 1);
  ASSERT_EQ(d.profiles.size(), 4u);
  ASSERT_EQ(d.matrix.cols(), 2u);
  int plus = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(d.matrix(i, 0), 1.0);
    EXPECT_TRUE(d.matrix(i, 1) == 1.0 || d.matrix(i, 1) == -1.0);
    plus += d.matrix(i, 1) > 0;
  }
  EXPECT_EQ(plus, 2);
}

TEST(GenerateDesign, TwoByTwoIsFullRankByDeterminant) {
  for (std::uint64_t seed : {7u, 8u, 9u, 10u}) {
    const ConjointDesign d = generate_design(catalog({2, 2}), 4, seed);
    ASSERT_EQ(d.matrix.rows(), 4u);
    ASSERT_EQ(d.matrix.cols(), 3u);
    const double minors[] = {det3(d.matrix, 0, 1, 2), det3(d.matrix, 0, 1, 3),
                             det3(d.matrix, 0, 2, 3), det3(d.matrix, 1, 2, 3)};
    EXPECT_TRUE(std::any_of(std::begin(minors), std::end(minors),
                            [](double m) { return std::abs(m) > 1e-9; }))
        << "seed " << seed;
  }
}

TEST(GenerateDesign, DeterministicAndDistinctIds) {
  const AttributeCatalog c = catalog({3, 2, 4});
  const ConjointDesign a = generate_design(c, 12, 99), b = generate_design(c, 12, 99);
  EXPECT_EQ(a, b);
  std::set<std::string> ids;
  for (const auto& p : a.profiles) ids.insert(p.id);
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_EQ(a.profile_index("p3"), 2u);
  EXPECT_THROW(a.profile_index("nope"), UnknownIdError);
}

TEST(GenerateDesign, TooFewProfiles) {
  EXPECT_THROW(generate_design(catalog({3, 3}), 4, 1), DesignError);
}

TEST(FitPartWorths, ClosedFormTwoLevels) {
  const ConjointDesign d = generate_design(catalog({2}), 4, 3);
  std::vector<Response> rs;
  for (const auto& p : d.profiles) rs.push_back({"h", p.id, p.levels[0] == 0 ? 1.0 : 0.0});
  const PartWorths pw = fit_part_worths(d, rs);
  const auto& s = pw.of("h");
  EXPECT_NEAR(s.alpha, 0.5, 1e-12);
  EXPECT_NEAR(s.beta[0][0], 0.5, 1e-12);
  EXPECT_NEAR(s.beta[0][1], -0.5, 1e-12);
  EXPECT_NEAR(s.residual_norm, 0.0, 1e-12);

  EXPECT_NEAR(predict_rating(s, std::vector<std::size_t>{0}), 1.0, 1e-12);
  EXPECT_NEAR(predict_rating(s, pw.catalog, {"L1"}), 0.0, 1e-12);
  EXPECT_THROW(predict_rating(s, pw.catalog, {"L9"}), UnknownIdError);
  EXPECT_THROW(pw.of("zz"), UnknownIdError);
}

TEST(FitPartWorths, ConstantRatings) {
  const ConjointDesign d = generate_design(catalog({3, 2}), 8, 4);
  std::vector<Response> rs;
  for (const auto& p : d.profiles) rs.push_back({"h", p.id, 6.5});
  const auto s = fit_part_worths(d, rs).of("h");
  EXPECT_NEAR(s.alpha, 6.5, 1e-12);
  for (const auto& b : s.beta)
    for (double x : b) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(FitPartWorths, PlantedRecovery) {
  const ConjointDesign d = generate_design(catalog({2}), 6, 5);
  const auto s = fit_part_worths(d, planted(d, "h", 0.0, {{0.3, -0.3}})).of("h");
  EXPECT_NEAR(s.beta[0][0], 0.3, 1e-8);
  EXPECT_NEAR(s.beta[0][1], -0.3, 1e-8);
}

TEST(FitPartWorths, MissingAndDuplicateRatings) {
  const ConjointDesign d = generate_design(catalog({2}), 4, 3);
  std::vector<Response> rs{{"h", "p1", 1.0}, {"h", "p2", 1.0}};
  try {
    fit_part_worths(d, rs);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(h, p3)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(h, p4)"), std::string::npos) << msg;
  }
  rs.push_back({"h", "p1", 2.0});
  EXPECT_THROW(fit_part_worths(d, rs), Error);
  EXPECT_THROW(fit_part_worths(d, {{"h", "p77", 1.0}}), UnknownIdError);
}

TEST(FitStakeholder, RankDeficientSubset) {
  const ConjointDesign d = generate_design(catalog({3}), 6, 3);
  // Two rows cannot identify three coefficients.
  const std::vector<std::size_t> rows{0, 1};
  const std::vector<double> y{1.0, 2.0};
  EXPECT_THROW(fit_stakeholder(d, "h", rows, y), DesignError);
}

TEST(FitPartWorthsProperty, NoiselessRecoveryAndSumToZero) {
  Rng rng(36);
  for (int trial = 0; trial < 200; ++trial) {
    const AttributeCatalog c = catalog({2 + rng.below(3), 2 + rng.below(3), 2 + rng.below(2)});
    const ConjointDesign d = generate_design(c, c.n_columns() + 3 + rng.below(10), rng.next());
    const auto beta = random_beta(rng, c);
    const double alpha = rng.uniform(-3, 3);
    const auto s = fit_part_worths(d, planted(d, "h", alpha, beta)).of("h");
    EXPECT_NEAR(s.alpha, alpha, 1e-8);
    for (std::size_t a = 0; a < beta.size(); ++a) {
      double sum = 0.0;
      for (std::size_t l = 0; l < beta[a].size(); ++l) {
        EXPECT_NEAR(s.beta[a][l], beta[a][l], 1e-8);
        sum += s.beta[a][l];
      }
      EXPECT_NEAR(sum, 0.0, 1e-9);
    }
  }
}

TEST(FitPartWorthsProperty, NoisyRecoveryRate) {
  const AttributeCatalog c = catalog({3, 2, 4});
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    const ConjointDesign d = generate_design(c, 200, seed);
    const auto beta = random_beta(rng, c);
    const auto s = fit_part_worths(d, planted(d, "h", 1.0, beta, &rng, 0.05)).of("h");
    bool close = true;
    for (std::size_t a = 0; a < beta.size(); ++a)
      for (std::size_t l = 0; l < beta[a].size(); ++l)
        close = close && std::abs(s.beta[a][l] - beta[a][l]) <= 0.05;
    ok += close;
  }
  EXPECT_GE(ok, 95);
}

TEST(PredictRating, ReproducesFittedValues) {
  Rng rng(37);
  const AttributeCatalog c = catalog({3, 3});
  const ConjointDesign d = generate_design(c, 15, 11);
  std::vector<Response> rs;
  for (const auto& p : d.profiles) rs.push_back({"h", p.id, rng.uniform(0, 10)});
  const auto s = fit_part_worths(d, rs).of("h");
  double rss = 0.0;
  for (std::size_t i = 0; i < d.profiles.size(); ++i) {
    const double e = rs[i].rating - predict_rating(s, d.profiles[i].levels);
    rss += e * e;
  }
  EXPECT_NEAR(std::sqrt(rss), s.residual_norm, 1e-9);
}

TEST(PredictRatingProperty, AffineInBeta) {
  Rng rng(38);
  const AttributeCatalog c = catalog({3, 2});
  for (int trial = 0; trial < 200; ++trial) {
    StakeholderPartWorths s;
    s.alpha = rng.uniform(-2, 2);
    s.beta = random_beta(rng, c);
    StakeholderPartWorths s2 = s;
    for (auto& b : s2.beta)
      for (double& x : b) x *= 2.0;
    const std::vector<std::size_t> lv{rng.below(3), rng.below(2)};
    EXPECT_NEAR(predict_rating(s2, lv) - s.alpha, 2.0 * (predict_rating(s, lv) - s.alpha), 1e-12);
  }
  StakeholderPartWorths zero{"h", 4.0, {{0, 0, 0}, {0, 0}}, 0, 0};
  EXPECT_EQ(predict_rating(zero, std::vector<std::size_t>{1, 1}), 4.0);
}

TEST(AggregateUtilities, Modes) {
  PartWorths pw{catalog({2, 2}), {{"h", 0.5, {{0.5, -0.5}, {0.125, -0.125}}, 0, 0}}};
  const UtilityVector sum = aggregate_utilities(pw, ExtractionMode::kSum);
  EXPECT_EQ(sum.u(0, 0), 0.0);
  EXPECT_TRUE(sum.degenerate);
  EXPECT_EQ(sum.mode, ExtractionMode::kSum);
  const UtilityVector range = aggregate_utilities(pw);
  EXPECT_EQ(range.mode, ExtractionMode::kRange);
  EXPECT_FALSE(range.degenerate);
  EXPECT_DOUBLE_EQ(range.u(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(range.u(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(range.u(0, 0) / range.u(0, 1), 4.0);
  EXPECT_EQ(range.metric_ids, (std::vector<std::string>{"t0", "t1"}));
  EXPECT_THROW(parse_mode("median"), ConfigError);
  EXPECT_EQ(mode_name(ExtractionMode::kRange), "range");
}

TEST(AggregateUtilitiesProperty, RangeInvariantToRatingShift) {
  Rng rng(39);
  const AttributeCatalog c = catalog({3, 2});
  for (int trial = 0; trial < 100; ++trial) {
    const ConjointDesign d = generate_design(c, 10, rng.next());
    std::vector<Response> rs;
    for (const auto& p : d.profiles) rs.push_back({"h", p.id, rng.uniform(0, 10)});
    auto shifted = rs;
    const double k = rng.uniform(-5, 5);
    for (auto& r : shifted) r.rating += k;
    const UtilityVector a = aggregate_utilities(fit_part_worths(d, rs));
    const UtilityVector b = aggregate_utilities(fit_part_worths(d, shifted));
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(a.u(0, j), b.u(0, j), 1e-9);
      EXPECT_GE(a.u(0, j), 0.0);
    }
  }
}

TEST(UtilitiesCsv, RoundTripAndAlign) {
  const std::string text = "stakeholder_id,metric_id,u\nh2,lat,0.9\nh2,acc,0.1\nh1,acc,0.6\nh1,lat,0.4\n";
  const UtilityVector U = read_utilities_csv(text);
  EXPECT_EQ(U.stakeholder_ids, (std::vector<std::string>{"h2", "h1"}));
  const UtilityVector A = align_utilities(U, testing::f1());
  EXPECT_EQ(A.stakeholder_ids, (std::vector<std::string>{"h1", "h2"}));
  EXPECT_EQ(A.u, (DenseMatrix{{0.6, 0.4}, {0.1, 0.9}}));
  EXPECT_EQ(read_utilities_csv(write_utilities_csv(A)).u, A.u);

  EXPECT_THROW(read_utilities_csv("stakeholder_id,metric_id,u\nh1,acc,1\nh2,lat,1\n"), ParseError);
  EXPECT_THROW(read_utilities_csv("stakeholder_id,metric_id,u\nh1,acc,1\nh1,acc,2\n"), ParseError);
  EXPECT_THROW(align_utilities(read_utilities_csv("stakeholder_id,metric_id,u\nh1,acc,1\n"),
                               testing::f1()),
               UnknownIdError);
}

TEST(ResponsesCsv, Reads) {
  const auto rs = read_responses_csv("stakeholder_id,profile_id,rating\nh1,p1,7\nh2,p1,3.5\n");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[1].stakeholder_id, "h2");
  EXPECT_EQ(rs[1].rating, 3.5);
  EXPECT_THROW(read_responses_csv("who,what,rating\nh1,p1,7\n"), ParseError);
}

}  // namespace
}  // namespace hbench
