#pragma once

// Multiple imputation of missing binary cells from the observed state of the
// adjacent loci on the same chromosome, and consensus of the edge sets
// inferred on the imputed copies.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "logitnet/core.hpp"
#include "logitnet/parallel.hpp"

namespace logitnet {

struct ImputeOptions {
  /// Added to both outcome counts of every conditional-table cell.
  double pseudo_count = 0.5;
  int jobs = 1;
};

struct ImputeResult {
  std::vector<BinaryMatrix> datasets;
  /// Missing cells drawn from the column marginal, per reason.
  std::size_t marginal_no_neighbour = 0;
  std::size_t marginal_zero_support = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline constexpr std::size_t kNoLocus = static_cast<std::size_t>(-1);

/// Probability that a missing cell is 1, fixed before any draw: the
/// distribution depends only on observed data.
struct CellPlan {
  std::size_t row, col;
  double prob;
};

/// Counts of (target = 1, total) over rows where the target and the given
/// neighbours are observed, split by the neighbours' states.
struct NeighbourTable {
  double ones[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
};

inline NeighbourTable tabulate(const BinaryMatrix& x, std::size_t j,
                               std::size_t left, std::size_t right) {
  NeighbourTable t;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (x.is_missing(i, j)) continue;
    int cell = 0;
    if (left != kNoLocus) {
      if (x.is_missing(i, left)) continue;
      cell = x(i, left);
    }
    if (right != kNoLocus) {
      if (x.is_missing(i, right)) continue;
      cell = 2 * cell + x(i, right);
    }
    t.total[cell] += 1;
    t.ones[cell] += x(i, j);
  }
  return t;
}

inline std::mt19937_64 replicate_stream(std::uint64_t seed,
                                        std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32), 0x494d5055u};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// `m` completed copies of `x`. A missing cell at locus j is drawn from
/// Pr(X_j = 1 | observed neighbours) estimated on the rows where j and those
/// neighbours are observed; with no observed neighbour, or no such rows, it
/// is drawn from the observed frequency of column j. Replicate k uses its
/// own stream derived from (seed, k).
inline ImputeResult impute(const BinaryMatrix& x, const GenomeAnnotation& ann,
                           int m, std::uint64_t seed,
                           const ImputeOptions& opt = {}) {
  x.validate();
  ann.validate(x.cols());
  if (m < 1) throw ValidationError("need at least one imputation replicate");
  if (!(opt.pseudo_count >= 0.0))
    throw ValidationError("pseudo_count must be >= 0");
  const std::size_t n = x.rows(), p = x.cols();

  std::vector<double> marginal(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double seen = 0, ones = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!x.is_missing(i, j)) {
        seen += 1;
        ones += x(i, j);
      }
    if (seen == 0)
      throw MissingDataError("column " + std::to_string(j + 1) +
                             " has no observed entries");
    marginal[j] = ones / seen;
  }

  std::vector<std::size_t> left(p, detail::kNoLocus), right(p, detail::kNoLocus);
  for (const auto& chrom : ann.chromosomes())
    for (std::size_t k = 0; k < chrom.size(); ++k) {
      if (k > 0) left[chrom[k]] = chrom[k - 1];
      if (k + 1 < chrom.size()) right[chrom[k]] = chrom[k + 1];
    }

  ImputeResult out;
  std::vector<detail::CellPlan> plan;
  // Tables keyed by which neighbours are used: 0 none, 1 left, 2 right, 3 both.
  for (std::size_t j = 0; j < p; ++j) {
    detail::NeighbourTable tables[4];
    bool built[4] = {false, false, false, false};
    for (std::size_t i = 0; i < n; ++i) {
      if (!x.is_missing(i, j)) continue;
      const bool has_l = left[j] != detail::kNoLocus && !x.is_missing(i, left[j]);
      const bool has_r =
          right[j] != detail::kNoLocus && !x.is_missing(i, right[j]);
      const int kind = (has_l ? 1 : 0) + (has_r ? 2 : 0);
      double prob = marginal[j];
      if (kind == 0) {
        ++out.marginal_no_neighbour;
      } else {
        if (!built[kind]) {
          tables[kind] = detail::tabulate(x, j, has_l ? left[j] : detail::kNoLocus,
                                          has_r ? right[j] : detail::kNoLocus);
          built[kind] = true;
        }
        int cell = 0;
        if (has_l) cell = x(i, left[j]);
        if (has_r) cell = 2 * cell + x(i, right[j]);
        const auto& t = tables[kind];
        if (t.total[cell] == 0) {
          ++out.marginal_zero_support;
        } else {
          prob = (t.ones[cell] + opt.pseudo_count) /
                 (t.total[cell] + 2.0 * opt.pseudo_count);
        }
      }
      plan.push_back({i, j, prob});
    }
  }
  if (out.marginal_zero_support > 0)
    out.warnings.push_back(std::to_string(out.marginal_zero_support) +
                           " cell(s) had an empty conditional table; used the "
                           "column marginal");

  out.datasets.resize(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), opt.jobs, [&](std::size_t k) {
    auto rng = detail::replicate_stream(seed, k);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    BinaryMatrix copy = x;
    for (const auto& c : plan) copy.set(c.row, c.col, unif(rng) < c.prob ? 1 : 0);
    out.datasets[k] = std::move(copy);
  });
  return out;
}

/// Edges present in at least `min_count` of the sets, with their counts.
inline EdgeSet consensus_edges(const std::vector<EdgeSet>& per_dataset,
                               int min_count) {
  if (per_dataset.empty()) throw ValidationError("no edge sets to combine");
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  std::map<Edge, int> counts;
  for (const auto& s : per_dataset)
    for (const auto& e : s.edges) ++counts[e];
  EdgeSet out;
  for (const auto& [e, c] : counts)
    if (c >= min_count) {
      out.edges.insert(e);
      out.votes[e] = c;
    }
  return out;
}

}  // namespace logitnet
