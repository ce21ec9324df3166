#include <gtest/gtest.h>

#include <cmath>

#include "logitnet/evaluation.hpp"
#include "logitnet/simulation.hpp"

using namespace logitnet;

namespace {

EdgeSet edges(std::initializer_list<std::pair<std::size_t, std::size_t>> list) {
  EdgeSet e;
  for (auto [r, s] : list) e.insert(r, s);
  return e;
}

EdgeSet default_chain() {
  return edges({{49, 149}, {149, 249}, {249, 349}, {349, 449}, {449, 549}});
}

}  // namespace

TEST(DiamondDistance, Examples) {
  EXPECT_EQ(diamond_distance(make_edge(49, 149), make_edge(49, 149)), 0);
  EXPECT_EQ(diamond_distance(make_edge(60, 140), make_edge(49, 149)), 20);
  EXPECT_EQ(diamond_distance(make_edge(99, 169), make_edge(49, 149)), 70);
  EXPECT_EQ(diamond_distance(make_edge(149, 49), make_edge(49, 149)), 0);
}

TEST(Score, DiamondRadiusDecidesCorrectness) {
  const auto truth = default_chain();
  const auto inside = score(edges({{60, 140}}), truth);
  EXPECT_EQ(inside.false_detections, 0u);
  EXPECT_NEAR(inside.fnr, 0.8, 1e-12);
  const auto outside = score(edges({{99, 169}}), truth);
  EXPECT_EQ(outside.false_detections, 1u);
  EXPECT_EQ(outside.fpr, 1.0);
  EXPECT_EQ(outside.fnr, 1.0);
}

TEST(Score, EmptyEstimateHasNoFalsePositives) {
  const auto s = score(EdgeSet{}, default_chain());
  EXPECT_EQ(s.fpr, 0.0);
  EXPECT_EQ(s.fnr, 1.0);
  EXPECT_EQ(s.total(), 1.0);
}

TEST(Score, OneTrueEdgeOfFive) {
  const auto s = score(edges({{49, 149}, {149, 249}, {249, 349}, {349, 449}}), default_chain());
  EXPECT_NEAR(s.fnr, 0.2, 1e-12);
  EXPECT_EQ(s.fpr, 0.0);
}

TEST(Score, ManyHitsOnOneTrueEdgeAllCountAsCorrect) {
  const auto s = score(edges({{49, 149}, {50, 150}, {48, 151}}), default_chain());
  EXPECT_EQ(s.fpr, 0.0);
  EXPECT_EQ(s.missed, 4u);
}

TEST(Score, RejectsEmptyTruthAndNegativeRadius) {
  EXPECT_THROW(score(EdgeSet{}, EdgeSet{}), ValidationError);
  EXPECT_THROW(score(EdgeSet{}, default_chain(), -1), ValidationError);
}

TEST(DetectedTrueEdges, UsesTheDiamond) {
  const auto d = detected_true_edges(edges({{52, 147}, {300, 500}}), default_chain());
  EXPECT_EQ(d, edges({{49, 149}}));
}

TEST(Spearman, KnownValues) {
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-12);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-12);
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
  EXPECT_TRUE(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
}

TEST(ScorePath, BestPointAndSkippedEntries) {
  std::vector<FitResult> path(3);
  for (auto& f : path) f.B = CoefMatrix(600, 0.0);
  path[0].lambda = 3;
  path[1].lambda = 2;
  path[1].B(49, 149) = 0.4;
  path[2].lambda = 1;
  path[2].skipped = true;
  const auto c = score_path(path, default_chain());
  EXPECT_EQ(c.best, 1u);
  EXPECT_NEAR(c.optimal_total, 0.8, 1e-12);
  EXPECT_EQ(c.fitted, (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(c.edges, (std::vector<std::size_t>{0, 1, 0}));
}

TEST(ErrorCurve, BothMethodsScoreTheWholeGrid) {
  sim::BackgroundParams bg;
  bg.n_chrom = 3;
  bg.loci_per_chrom = 40;
  const auto d = sim::gen_dataset(bg, sim::chain_model(bg), 150, 2);
  const WeightMatrix w(d.x.cols());
  const auto grid = lambda_grid(lambda_max(d.x, w), 6, 0.2);
  for (auto method : {Method::LogitNet, Method::SepLogit}) {
    const auto c = error_curve(d.x, d.truth, w, grid, method);
    ASSERT_EQ(c.scores.size(), grid.size());
    EXPECT_TRUE(std::isfinite(c.optimal_total));
    EXPECT_LE(c.optimal_total, 1.0);
  }
}
