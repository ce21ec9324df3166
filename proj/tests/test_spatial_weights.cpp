#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "logitnet/simulation.hpp"
#include "logitnet/spatial_weights.hpp"

using namespace logitnet;
using weights::compute_weights;
using weights::univariate_log_or;

namespace {

BinaryMatrix from_table(int n11, int n10, int n01, int n00) {
  BinaryMatrix x(static_cast<std::size_t>(n11 + n10 + n01 + n00), 2);
  std::size_t i = 0;
  for (auto [count, a, b] : {std::tuple{n11, 1, 1}, {n10, 1, 0}, {n01, 0, 1}, {n00, 0, 0}})
    for (int k = 0; k < count; ++k, ++i) {
      x.set(i, 0, a);
      x.set(i, 1, b);
    }
  return x;
}

BinaryMatrix background_only(std::size_t n, double nu, std::size_t chroms, std::size_t loci,
                             std::uint64_t seed) {
  sim::BackgroundParams bg;
  bg.nu = nu;
  bg.n_chrom = chroms;
  bg.loci_per_chrom = loci;
  sim::PathwaySpec none;
  return sim::gen_dataset(bg, none, n, seed).x;
}

}  // namespace

TEST(UnivariateLogOr, TwoByTwoTable) {
  const auto a = univariate_log_or(from_table(2, 1, 1, 2), 0, 1);
  EXPECT_NEAR(a.value, std::log(4.0), 1e-12);
  EXPECT_FALSE(a.corrected);
  EXPECT_NEAR(univariate_log_or(from_table(2, 1, 1, 2), 1, 0).value, std::log(4.0), 1e-12);
}

TEST(UnivariateLogOr, BalancedColumnsGiveZero) {
  EXPECT_NEAR(univariate_log_or(from_table(5, 5, 5, 5), 0, 1).value, 0.0, 1e-12);
}

TEST(UnivariateLogOr, ZeroCellIsCorrectedAndConstantColumnFlagged) {
  const auto identical = univariate_log_or(from_table(4, 0, 0, 6), 0, 1);
  EXPECT_TRUE(identical.corrected);
  EXPECT_NEAR(identical.value, std::log(4.5 * 6.5 / 0.25), 1e-12);
  const auto constant = univariate_log_or(from_table(3, 0, 3, 0), 0, 1);
  EXPECT_TRUE(constant.degenerate);
  EXPECT_EQ(constant.value, 0.0);
}

TEST(Loess, ReproducesALine) {
  std::vector<double> xs, ys;
  for (int k = 0; k < 20; ++k) {
    xs.push_back(k);
    ys.push_back(2.0 - 0.3 * k);
  }
  const auto fit = weights::loess_local_linear(xs, ys, {0.5, 7.0, 19.0}, 10);
  EXPECT_NEAR(fit[0], 2.0 - 0.15, 1e-10);
  EXPECT_NEAR(fit[1], 2.0 - 2.1, 1e-10);
  EXPECT_NEAR(fit[2], 2.0 - 5.7, 1e-10);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(weights::median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(weights::median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(ComputeWeights, AtLeastOneAndOneAcrossChromosomes) {
  sim::BackgroundParams bg;
  bg.n_chrom = 3;
  bg.loci_per_chrom = 40;
  const auto d = sim::gen_dataset(bg, sim::chain_model(bg), 200, 3);
  const auto res = compute_weights(d.x, d.annotation);
  EXPECT_NO_THROW(res.w.validate(d.annotation));
  for (std::size_t r = 0; r < d.x.cols(); ++r)
    for (std::size_t s = r + 1; s < d.x.cols(); ++s) {
      EXPECT_GE(res.w(r, s), 1.0);
      if (!d.annotation.same_chromosome(r, s)) { EXPECT_EQ(res.w(r, s), 1.0); }
    }
}

TEST(ComputeWeights, TruncationKeepsAContiguousBlock) {
  const auto x = background_only(300, 10.0, 1, 60, 5);
  const auto ann = GenomeAnnotation::uniform(1, 60);
  const auto chrom = ann.chromosomes()[0];
  for (std::size_t target : {0u, 17u, 30u, 59u}) {
    const auto prof = weights::target_profile(x, ann, chrom, target);
    EXPECT_EQ(prof.alpha_final[prof.target_pos], 0.0);
    for (std::size_t k = prof.target_pos + 1; k + 1 < chrom.size(); ++k)
      if (prof.alpha_final[k] == 0.0 && prof.alpha_smooth[k] < prof.epsilon) {
        for (std::size_t m = k + 1; m < chrom.size(); ++m) EXPECT_EQ(prof.alpha_final[m], 0.0);
      }
    for (std::size_t k = prof.target_pos; k-- > 1;)
      if (prof.alpha_final[k] == 0.0 && prof.alpha_smooth[k] < prof.epsilon) {
        for (std::size_t m = 0; m < k; ++m) EXPECT_EQ(prof.alpha_final[m], 0.0);
      }
    for (double a : prof.alpha_final) EXPECT_GE(a, 0.0);
  }
}

TEST(ComputeWeights, IndependentLociGiveWeightsNearOne) {
  std::mt19937_64 rng(6);
  std::bernoulli_distribution coin(0.3);
  BinaryMatrix x(2000, 30);
  for (std::size_t i = 0; i < 2000; ++i)
    for (std::size_t j = 0; j < 30; ++j) x.set(i, j, coin(rng));
  const auto res = compute_weights(x, GenomeAnnotation::uniform(1, 30));
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t s = r + 1; s < 30; ++s, ++count) total += res.w(r, s);
  EXPECT_LT(total / static_cast<double>(count), 1.1);
}

TEST(ComputeWeights, DependentNeighboursGetLargerWeights) {
  const auto x = background_only(400, 3.0, 1, 50, 7);
  const auto res = compute_weights(x, GenomeAnnotation::uniform(1, 50));
  double near = 0.0, far = 0.0;
  for (std::size_t r = 0; r + 40 < 50; ++r) {
    near += res.w(r, r + 1);
    far += res.w(r, r + 40);
  }
  EXPECT_GT(near / 10.0, 2.0);
  EXPECT_GT(near, far);
}

TEST(ComputeWeights, ShortChromosomeIsFlagged) {
  const auto x = background_only(100, 10.0, 2, 6, 8);
  const auto res = compute_weights(x, GenomeAnnotation::uniform(2, 6));
  EXPECT_EQ(res.warnings.size(), 2u);
}

TEST(ComputeWeights, ParallelMatchesSerial) {
  const auto x = background_only(150, 10.0, 2, 30, 9);
  const auto ann = GenomeAnnotation::uniform(2, 30);
  EXPECT_EQ(compute_weights(x, ann, 1).w.w, compute_weights(x, ann, 3).w.w);
}
