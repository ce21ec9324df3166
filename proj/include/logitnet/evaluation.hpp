#pragma once

// Scoring estimated networks against the true pathway edges. A detected
// pair (r, s) counts as correct when it lies within L1 distance `radius`
// of some true edge in either orientation (the "diamond" around the edge).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <vector>

#include "logitnet/core.hpp"
#include "logitnet/seplogit.hpp"
#include "logitnet/solver.hpp"

namespace logitnet {

inline constexpr int kDiamondRadius = 30;

struct Score {
  double fpr = 0.0;
  double fnr = 1.0;
  std::size_t detections = 0;
  std::size_t false_detections = 0;
  std::size_t missed = 0;

  double total() const { return fpr + fnr; }
};

/// L1 distance from the unordered pair `e` to the unordered pair `t`.
inline long diamond_distance(const Edge& e, const Edge& t) {
  auto d = [](std::size_t a, std::size_t b) {
    return std::labs(static_cast<long>(a) - static_cast<long>(b));
  };
  return std::min(d(e.first, t.first) + d(e.second, t.second),
                  d(e.first, t.second) + d(e.second, t.first));
}

inline Score score(const EdgeSet& estimated, const EdgeSet& truth,
                   int radius = kDiamondRadius) {
  if (truth.edges.empty()) throw ValidationError("true edge set is empty");
  if (radius < 0) throw ValidationError("radius must be >= 0");
  Score out;
  std::vector<std::uint8_t> hit(truth.size(), 0);
  for (const auto& e : estimated.edges) {
    bool correct = false;
    std::size_t k = 0;
    for (const auto& t : truth.edges) {
      if (diamond_distance(e, t) <= radius) {
        correct = true;
        hit[k] = 1;
      }
      ++k;
    }
    if (!correct) ++out.false_detections;
  }
  out.detections = estimated.size();
  out.missed = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 0));
  out.fpr = out.detections == 0 ? 0.0
                                : static_cast<double>(out.false_detections) /
                                      static_cast<double>(out.detections);
  out.fnr = static_cast<double>(out.missed) / static_cast<double>(truth.size());
  return out;
}

inline Score score(const CoefMatrix& b, const EdgeSet& truth,
                   int radius = kDiamondRadius) {
  return score(coef_to_edges(b), truth, radius);
}

/// True edges with at least one estimated pair inside their diamond.
inline EdgeSet detected_true_edges(const EdgeSet& estimated,
                                   const EdgeSet& truth,
                                   int radius = kDiamondRadius) {
  EdgeSet out;
  for (const auto& t : truth.edges)
    for (const auto& e : estimated.edges)
      if (diamond_distance(e, t) <= radius) {
        out.insert(t.first, t.second);
        break;
      }
  return out;
}

enum class Method { LogitNet, SepLogit };

struct ErrorCurve {
  std::vector<double> lambda;
  std::vector<Score> scores;
  std::vector<std::uint8_t> fitted;  // 0 where the path stopped early
  std::vector<std::size_t> edges;
  std::size_t best = 0;  // index of the smallest total among fitted points
  double optimal_total = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void pick_best(ErrorCurve& c) {
  for (std::size_t k = 0; k < c.scores.size(); ++k) {
    if (!c.fitted[k]) continue;
    const double t = c.scores[k].total();
    if (std::isnan(c.optimal_total) || t < c.optimal_total) {
      c.optimal_total = t;
      c.best = k;
    }
  }
}

}  // namespace detail

inline ErrorCurve score_path(const std::vector<FitResult>& path,
                             const EdgeSet& truth, int radius = kDiamondRadius) {
  ErrorCurve c;
  for (const auto& f : path) {
    c.lambda.push_back(f.lambda);
    c.fitted.push_back(f.skipped ? 0 : 1);
    if (f.skipped) {
      c.scores.push_back({});
      c.edges.push_back(0);
      continue;
    }
    const auto e = coef_to_edges(f.B);
    c.scores.push_back(score(e, truth, radius));
    c.edges.push_back(e.size());
  }
  detail::pick_best(c);
  return c;
}

inline ErrorCurve score_path(const std::vector<SepLogitResult>& path,
                             const EdgeSet& truth, Rule rule,
                             int radius = kDiamondRadius) {
  ErrorCurve c;
  for (const auto& f : path) {
    c.lambda.push_back(f.lambda);
    c.fitted.push_back(f.skipped ? 0 : 1);
    if (f.skipped) {
      c.scores.push_back({});
      c.edges.push_back(0);
      continue;
    }
    const auto e = reconcile(f.B, rule);
    c.scores.push_back(score(e, truth, radius));
    c.edges.push_back(e.size());
  }
  detail::pick_best(c);
  return c;
}

struct CurveOptions {
  SolverConfig cfg;
  Rule rule = Rule::Or;
  int radius = kDiamondRadius;
  int jobs = 1;
  std::size_t max_edges = 0;
};

/// Fits the whole grid (warm-started) with the chosen method and scores
/// every point.
inline ErrorCurve error_curve(const BinaryMatrix& x, const EdgeSet& truth,
                              const WeightMatrix& w,
                              const std::vector<double>& grid, Method method,
                              const CurveOptions& opt = {}) {
  if (method == Method::LogitNet)
    return score_path(fit_path(x, w, grid, opt.cfg, opt.max_edges), truth,
                      opt.radius);
  return score_path(
      fit_seplogit_path(x, w, grid, opt.cfg, opt.jobs, opt.max_edges), truth,
      opt.rule, opt.radius);
}

/// Spearman rank correlation with average ranks for ties; NaN when either
/// input is constant.
inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ValidationError("spearman needs equal-length inputs");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
      std::size_t m = k;
      while (m + 1 < idx.size() && v[idx[m + 1]] == v[idx[k]]) ++m;
      const double avg = 0.5 * static_cast<double>(k + m) + 1.0;
      for (std::size_t t = k; t <= m; ++t) r[idx[t]] = avg;
      k = m + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - ma) * (rb[k] - mb);
    saa += (ra[k] - ma) * (ra[k] - ma);
    sbb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace logitnet
