#pragma once

// Simulation benchmark: generate a dataset, estimate weights, trace both
// methods along their lambda grids and score every grid point.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "logitnet/core.hpp"
#include "logitnet/evaluation.hpp"
#include "logitnet/seplogit.hpp"
#include "logitnet/simulation.hpp"
#include "logitnet/solver.hpp"
#include "logitnet/spatial_weights.hpp"

namespace logitnet::bench {

struct Options {
  sim::BackgroundParams background;
  std::size_t n = 200;
  int grid_size = 50;
  double grid_ratio = 0.01;
  SolverConfig cfg;
  int radius = kDiamondRadius;
  int jobs = 1;
  /// Paths stop once a fit has more edges than this (0: never).
  std::size_t max_edges = 0;
  bool run_seplogit = true;
};

struct Replicate {
  std::uint64_t seed = 0;
  sim::Dataset data;
  WeightMatrix w;
  std::vector<std::string> weight_warnings;
  std::vector<double> logitnet_grid, seplogit_grid;
  ErrorCurve logitnet, seplogit;
};

/// One replicate: dataset from `seed`, weights from the data, LogitNet on a
/// grid anchored at lambda_max and SepLogit(OR) on a grid anchored at its
/// own lambda_max.
inline Replicate run_replicate(const sim::PathwaySpec& spec,
                               std::uint64_t seed, const Options& opt) {
  Replicate out;
  out.seed = seed;
  out.data = sim::gen_dataset(opt.background, spec, opt.n, seed);
  auto wr = weights::compute_weights(out.data.x, out.data.annotation, opt.jobs);
  out.w = std::move(wr.w);
  out.weight_warnings = std::move(wr.warnings);

  CurveOptions copt;
  copt.cfg = opt.cfg;
  copt.radius = opt.radius;
  copt.jobs = opt.jobs;
  copt.max_edges = opt.max_edges;
  copt.rule = Rule::Or;

  out.logitnet_grid = lambda_grid(lambda_max(out.data.x, out.w), opt.grid_size,
                                  opt.grid_ratio);
  out.logitnet = error_curve(out.data.x, out.data.truth, out.w,
                             out.logitnet_grid, Method::LogitNet, copt);
  if (opt.run_seplogit) {
    out.seplogit_grid = lambda_grid(seplogit_lambda_max(out.data.x, out.w),
                                    opt.grid_size, opt.grid_ratio);
    out.seplogit = error_curve(out.data.x, out.data.truth, out.w,
                               out.seplogit_grid, Method::SepLogit, copt);
  }
  return out;
}

struct Summary {
  std::size_t count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();  // sample sd
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

/// Parses "a..b" (inclusive) or a comma-separated list of seeds.
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size() || s.front() == '-')
      throw ValidationError("invalid seed '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = number(text.substr(0, dots));
    const auto hi = number(text.substr(dots + 2));
    if (hi < lo) throw ValidationError("empty seed range '" + text + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(number(text.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace logitnet::bench
