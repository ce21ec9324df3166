#pragma once

// Choosing lambda: V-fold cross-validation on un-shrunk refits with a
// majority vote over the folds, and BIC on the full-data un-shrunk refits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "logitnet/core.hpp"
#include "logitnet/parallel.hpp"
#include "logitnet/solver.hpp"

namespace logitnet {

struct SelectionOptions {
  SolverConfig cfg;
  int jobs = 1;
  /// Stop once a fit has more edges than this (0: never).
  std::size_t max_edges = 0;
  /// Stop once the criterion has not improved for this many consecutive
  /// grid points (0: never). Lambdas past either stop cannot be selected.
  int patience = 5;
};

namespace detail {

/// Tracks the best criterion value seen along a descending grid walk.
struct PatienceTracker {
  int patience;
  int since_best = 0;
  bool any = false;
  double best = 0.0;

  /// Records `value` (larger is better); returns true when the walk should
  /// stop.
  bool record(double value) {
    if (!any || value > best) {
      best = value;
      any = true;
      since_best = 0;
      return false;
    }
    ++since_best;
    return patience > 0 && since_best >= patience;
  }
};

}  // namespace detail

/// Fold label in [0, V) for every sample: a seeded shuffle dealt round
/// robin, so fold sizes differ by at most one.
inline std::vector<int> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (n < 2 * static_cast<std::size_t>(folds))
    throw ValidationError("need n >= 2 * folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t k = n; k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(perm[k - 1], perm[pick(rng)]);
  }
  std::vector<int> label(n);
  for (std::size_t k = 0; k < n; ++k)
    label[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return label;
}

/// Pairs selected in more than half of the folds.
inline EdgeSet majority_vote(const std::map<Edge, int>& votes, int folds) {
  EdgeSet out;
  for (const auto& [e, v] : votes)
    if (2 * v > folds) {
      out.edges.insert(e);
      out.votes[e] = v;
    }
  return out;
}

struct CVResult {
  std::vector<double> lambda_grid;
  /// Test log-likelihood summed over folds; -inf past the point where the
  /// walk stopped.
  std::vector<double> cv_loglik;
  std::size_t index_cv = 0;
  double lambda_cv = 0.0;
  int folds = 0;
  /// Per-pair number of folds whose un-shrunk fit at lambda_cv keeps it.
  std::map<Edge, int> votes;
  EdgeSet consensus;
  /// Un-shrunk supports per fold at lambda_cv.
  std::vector<EdgeSet> fold_supports;
  std::vector<std::string> warnings;
};

/// V-fold cross-validation. The grid is walked from the largest lambda
/// down; at each lambda every fold's warm-started path takes one step, the
/// shrunk support is refit un-shrunk on the training rows, and the refit is
/// scored by its log-likelihood on the held-out rows.
inline CVResult cross_validate(const BinaryMatrix& x, const WeightMatrix& w,
                               const std::vector<double>& grid, int folds,
                               std::uint64_t seed,
                               const SelectionOptions& opt = {}) {
  detail::check_fit_inputs(x, w);
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  if (opt.patience < 0) throw ValidationError("patience must be >= 0");
  const auto label = make_folds(x.rows(), folds, seed);
  const std::size_t g = grid.size();
  const auto V = static_cast<std::size_t>(folds);

  std::vector<BinaryMatrix> xtrain(V), xtest(V);
  std::vector<std::unique_ptr<PathSolver>> solvers(V);
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < x.rows(); ++i)
      (static_cast<std::size_t>(label[i]) == v ? test : train).push_back(i);
    xtrain[v] = x.select_rows(train);
    xtest[v] = x.select_rows(test);
    solvers[v] = std::make_unique<PathSolver>(xtrain[v], w, opt.cfg);
  }

  std::vector<std::vector<EdgeSet>> supports(V, std::vector<EdgeSet>(g));
  std::vector<double> ll(V);
  std::vector<std::size_t> shrunk_edges(V);
  std::vector<std::uint8_t> degenerate(V), ill_posed(V);

  CVResult out;
  out.lambda_grid = grid;
  out.folds = folds;
  out.cv_loglik.assign(g, -std::numeric_limits<double>::infinity());
  detail::PatienceTracker tracker{opt.patience};
  for (auto k : descending_order(grid)) {
    parallel_for(V, opt.jobs, [&](std::size_t v) {
      const auto shrunk = solvers[v]->fit_at(grid[k]);
      shrunk_edges[v] = count_off_diagonal_nonzeros(shrunk.B);
      const auto uns = refit_unshrunk(xtrain[v], coef_to_edges(shrunk.B), w,
                                      opt.cfg, shrunk.B);
      supports[v][k] = coef_to_edges(uns.B);
      ll[v] = joint_loglik(uns.B, xtest[v]);
      if (!uns.degenerate_columns.empty()) degenerate[v] = 1;
      if (supports[v][k].size() >= xtrain[v].rows()) ill_posed[v] = 1;
    });
    out.cv_loglik[k] = std::accumulate(ll.begin(), ll.end(), 0.0);
    if (!tracker.any || out.cv_loglik[k] > tracker.best) out.index_cv = k;
    bool stop = tracker.record(out.cv_loglik[k]);
    for (auto e : shrunk_edges) stop = stop || (opt.max_edges > 0 && e > opt.max_edges);
    if (stop) break;
  }
  out.lambda_cv = grid[out.index_cv];
  for (std::size_t v = 0; v < V; ++v) {
    out.fold_supports.push_back(supports[v][out.index_cv]);
    for (const auto& e : supports[v][out.index_cv].edges) ++out.votes[e];
    if (degenerate[v])
      out.warnings.push_back("fold " + std::to_string(v + 1) +
                             ": constant column(s) fitted intercept-only");
    if (ill_posed[v])
      out.warnings.push_back("fold " + std::to_string(v + 1) +
                             ": un-shrunk refit with support >= n");
  }
  out.consensus = majority_vote(out.votes, folds);
  return out;
}

struct BicResult {
  std::vector<double> lambda_grid;
  /// -2 loglik + log(n) |support| per lambda; +inf where not fitted.
  std::vector<double> bic;
  std::vector<std::size_t> support_size;
  std::size_t index_bic = 0;
  double lambda_bic = 0.0;
  EdgeSet support;
  CoefMatrix B;  // un-shrunk fit at lambda_bic
  bool tie = false;
  std::vector<std::string> warnings;
};

/// -2 loglik + log(n) * (number of nonzero off-diagonals).
inline double bic_value(double loglik, std::size_t n, std::size_t edges) {
  return -2.0 * loglik +
         std::log(static_cast<double>(n)) * static_cast<double>(edges);
}

/// BIC over the grid, walked from the largest lambda down: each shrunk fit
/// is refit un-shrunk on the full data and scored. Ties go to the smallest
/// lambda.
inline BicResult bic_select(const BinaryMatrix& x, const WeightMatrix& w,
                            const std::vector<double>& grid,
                            const SelectionOptions& opt = {}) {
  detail::check_fit_inputs(x, w);
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  if (opt.patience < 0) throw ValidationError("patience must be >= 0");
  const std::size_t g = grid.size();
  PathSolver solver(x, w, opt.cfg);

  BicResult out;
  out.lambda_grid = grid;
  out.bic.assign(g, std::numeric_limits<double>::infinity());
  out.support_size.assign(g, 0);
  std::vector<FitResult> refits(g);
  detail::PatienceTracker tracker{opt.patience};
  for (auto k : descending_order(grid)) {
    const auto shrunk = solver.fit_at(grid[k]);
    refits[k] = refit_unshrunk(x, coef_to_edges(shrunk.B), w, opt.cfg, shrunk.B);
    out.support_size[k] = count_off_diagonal_nonzeros(refits[k].B);
    out.bic[k] = bic_value(refits[k].loglik, x.rows(), out.support_size[k]);
    const bool too_big =
        opt.max_edges > 0 && count_off_diagonal_nonzeros(shrunk.B) > opt.max_edges;
    if (tracker.record(-out.bic[k]) || too_big) break;
  }
  const double best = *std::min_element(out.bic.begin(), out.bic.end());
  if (!std::isfinite(best)) throw Error("no lambda could be evaluated");
  std::vector<std::size_t> minimizers;
  for (std::size_t k = 0; k < g; ++k)
    if (out.bic[k] == best) minimizers.push_back(k);
  out.index_bic = *std::min_element(
      minimizers.begin(), minimizers.end(),
      [&](auto a, auto b) { return grid[a] < grid[b]; });
  out.tie = minimizers.size() > 1;
  if (out.tie)
    out.warnings.push_back(std::to_string(minimizers.size()) +
                           " lambdas share the minimum BIC; kept the smallest");
  out.lambda_bic = grid[out.index_bic];
  out.B = refits[out.index_bic].B;
  out.support = coef_to_edges(out.B);
  for (const auto& wmsg : refits[out.index_bic].warnings)
    out.warnings.push_back(wmsg);
  return out;
}

}  // namespace logitnet
