#pragma once

// Adaptive spatial-correlation penalty weights. For every target locus the
// univariate log odds ratios with the other loci of its chromosome form a
// profile; the profile is loess-smoothed, cut to zero beyond the point where
// it first drops below a noise level, and exponentiated.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "logitnet/core.hpp"
#include "logitnet/parallel.hpp"

namespace logitnet::weights {

inline constexpr std::size_t kLoessWindow = 10;

struct LogOddsRatio {
  double value = 0.0;
  bool corrected = false;   // a zero cell; 0.5 added to every cell
  bool degenerate = false;  // a constant column; value forced to 0
};

/// Slope of the single-predictor logistic regression of `target` on `other`,
/// which for two binary variables is the log odds ratio of their 2x2 table.
/// Rows missing either value are skipped.
inline LogOddsRatio univariate_log_or(const BinaryMatrix& x, std::size_t target,
                                      std::size_t other) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (x.is_missing(i, target) || x.is_missing(i, other)) continue;
    const int a = x(i, target), b = x(i, other);
    (a ? (b ? n11 : n10) : (b ? n01 : n00)) += 1.0;
  }
  LogOddsRatio out;
  if (n11 + n10 == 0 || n01 + n00 == 0 || n11 + n01 == 0 || n10 + n00 == 0) {
    out.degenerate = true;
    return out;
  }
  if (n11 == 0 || n10 == 0 || n01 == 0 || n00 == 0) {
    n11 += 0.5;
    n10 += 0.5;
    n01 += 0.5;
    n00 += 0.5;
    out.corrected = true;
  }
  out.value = std::log(n11) + std::log(n00) - std::log(n10) - std::log(n01);
  return out;
}

/// Local-linear loess with tricube weights over the `window` nearest points,
/// evaluated at `at`. Falls back to the weighted mean when the local design
/// is singular.
inline std::vector<double> loess_local_linear(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& at,
                                              std::size_t window) {
  std::vector<double> out(at.size(), 0.0);
  if (xs.empty()) return out;
  const std::size_t k = std::min(window, xs.size());
  std::vector<std::size_t> idx(xs.size());
  std::vector<double> dist(xs.size());
  for (std::size_t e = 0; e < at.size(); ++e) {
    const double x0 = at[e];
    for (std::size_t i = 0; i < xs.size(); ++i) dist[i] = std::abs(xs[i] - x0);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](auto a, auto b) { return dist[a] < dist[b]; });
    const double h = dist[idx[k - 1]];
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t m = 0; m < k; ++m) {
      const auto i = idx[m];
      double w = 1.0;
      if (h > 0) {
        const double u = dist[i] / h;
        w = u >= 1.0 ? 0.0 : std::pow(1.0 - u * u * u, 3);
      }
      const double dx = xs[i] - x0;
      sw += w;
      sx += w * dx;
      sy += w * ys[i];
      sxx += w * dx * dx;
      sxy += w * dx * ys[i];
    }
    if (sw <= 0) {
      // every neighbour sits exactly at the bandwidth
      double s = 0;
      for (std::size_t m = 0; m < k; ++m) s += ys[idx[m]];
      out[e] = s / static_cast<double>(k);
      continue;
    }
    const double det = sw * sxx - sx * sx;
    if (std::abs(det) <= 1e-12 * sw * std::max(sxx, 1.0))
      out[e] = sy / sw;
    else
      out[e] = (sxx * sy - sx * sxy) / det;  // intercept at x0
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lo =
        *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
    m = 0.5 * (m + lo);
  }
  return m;
}

/// Profile of one target locus over the loci of its chromosome, in
/// chromosome order.
struct SmoothedProfile {
  std::vector<std::size_t> loci;
  std::vector<double> alpha_raw;     // NaN at the target itself
  std::vector<double> alpha_smooth;  // before truncation
  std::vector<double> alpha_final;   // truncated and floored at 0
  double epsilon = 0.0;
  std::size_t target_pos = 0;  // position of the target inside `loci`
  bool window_shrunk = false;
  bool any_corrected = false;
};

inline SmoothedProfile target_profile(const BinaryMatrix& x,
                                      const GenomeAnnotation& ann,
                                      const std::vector<std::size_t>& chrom,
                                      std::size_t target,
                                      std::size_t window = kLoessWindow) {
  SmoothedProfile prof;
  prof.loci = chrom;
  const std::size_t m = chrom.size();
  prof.alpha_raw.assign(m, std::nan(""));
  std::vector<double> xs, ys, at(m);
  for (std::size_t k = 0; k < m; ++k) {
    at[k] = ann.position_index[chrom[k]];
    if (chrom[k] == target) {
      prof.target_pos = k;
      continue;
    }
    const auto a = univariate_log_or(x, target, chrom[k]);
    prof.any_corrected = prof.any_corrected || a.corrected;
    prof.alpha_raw[k] = a.value;
    xs.push_back(at[k]);
    ys.push_back(a.value);
  }
  prof.window_shrunk = xs.size() < window;
  prof.alpha_smooth = loess_local_linear(xs, ys, at, window);

  std::vector<double> gaps;
  for (std::size_t k = 0; k + 1 < m; ++k)
    gaps.push_back(std::abs(prof.alpha_smooth[k] - prof.alpha_smooth[k + 1]));
  prof.epsilon = median(gaps);

  prof.alpha_final.assign(m, 0.0);
  for (std::size_t k = prof.target_pos + 1; k < m; ++k) {
    if (prof.alpha_smooth[k] < prof.epsilon) break;
    prof.alpha_final[k] = prof.alpha_smooth[k];
  }
  for (std::size_t k = prof.target_pos; k-- > 0;) {
    if (prof.alpha_smooth[k] < prof.epsilon) break;
    prof.alpha_final[k] = prof.alpha_smooth[k];
  }
  for (auto& a : prof.alpha_final) a = std::max(a, 0.0);
  prof.alpha_final[prof.target_pos] = 0.0;
  return prof;
}

struct WeightsResult {
  WeightMatrix w;
  std::vector<std::string> warnings;
};

/// w_rs = exp(smoothed profile of target r at locus s) on the same
/// chromosome, 1 across chromosomes, symmetrized by the elementwise max.
inline WeightsResult compute_weights(const BinaryMatrix& x,
                                     const GenomeAnnotation& ann,
                                     int jobs = 1,
                                     std::size_t window = kLoessWindow) {
  x.validate();
  ann.validate(x.cols());
  const std::size_t p = x.cols();
  const auto chroms = ann.chromosomes();
  std::vector<const std::vector<std::size_t>*> chrom_of(p);
  for (const auto& c : chroms)
    for (auto j : c) chrom_of[j] = &c;

  std::vector<SmoothedProfile> profiles(p);
  parallel_for(p, jobs, [&](std::size_t r) {
    profiles[r] = target_profile(x, ann, *chrom_of[r], r, window);
  });

  WeightsResult out{WeightMatrix(p), {}};
  for (std::size_t r = 0; r < p; ++r) {
    const auto& prof = profiles[r];
    for (std::size_t k = 0; k < prof.loci.size(); ++k) {
      const auto s = prof.loci[k];
      if (s == r) continue;
      const double w = std::exp(prof.alpha_final[k]);
      out.w(r, s) = std::max(out.w(r, s), w);
    }
  }
  for (const auto& c : chroms)
    if (c.size() > 1 && c.size() - 1 < window)
      out.warnings.push_back("chromosome " + std::to_string(ann.chromosome[c[0]]) +
                             " has " + std::to_string(c.size()) +
                             " loci; loess window shrunk to chromosome size");
  return out;
}

}  // namespace logitnet::weights
