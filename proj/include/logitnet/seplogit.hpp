#pragma once

// SepLogit: p separate lasso logistic regressions sharing one lambda, with
// no symmetry constraint. Row r regresses column r on every other column.
// The numerics are the LogitNet solver's, one row at a time.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "logitnet/core.hpp"
#include "logitnet/parallel.hpp"
#include "logitnet/solver.hpp"

namespace logitnet {

enum class Rule { Or, And };

inline Rule parse_rule(const std::string& s) {
  if (s == "or" || s == "OR") return Rule::Or;
  if (s == "and" || s == "AND") return Rule::And;
  throw ValidationError("unknown rule '" + s + "' (expected or|and)");
}

/// Dense p x p matrix without a symmetry constraint; the diagonal holds the
/// intercepts.
class AsymmetricMatrix {
 public:
  AsymmetricMatrix() = default;
  explicit AsymmetricMatrix(std::size_t p, double fill = 0.0)
      : p_(p), data_(p * p, fill) {}

  std::size_t size() const { return p_; }
  double& operator()(std::size_t r, std::size_t s) { return data_[r * p_ + s]; }
  double operator()(std::size_t r, std::size_t s) const {
    return data_[r * p_ + s];
  }
  double* row(std::size_t r) { return &data_[r * p_]; }
  const double* row(std::size_t r) const { return &data_[r * p_]; }

  bool operator==(const AsymmetricMatrix&) const = default;

 private:
  std::size_t p_ = 0;
  std::vector<double> data_;
};

struct SepLogitResult {
  AsymmetricMatrix B;
  double lambda = 0.0;
  bool converged = true;  // every row converged
  int sweeps = 0;  // largest per-row full-sweep count
  /// Set on path entries never fitted because the path stopped early.
  bool skipped = false;
  std::vector<std::size_t> degenerate_columns;
  std::vector<std::string> warnings;
};

/// Off-diagonal pairs with beta_rs or beta_sr nonzero (OR), or both (AND).
inline EdgeSet reconcile(const AsymmetricMatrix& m, Rule rule) {
  EdgeSet e;
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t s = r + 1; s < m.size(); ++s) {
      const bool a = m(r, s) != 0.0, b = m(s, r) != 0.0;
      if (rule == Rule::Or ? (a || b) : (a && b)) e.insert(r, s);
    }
  return e;
}

namespace detail {

/// Coordinate-descent state for one logistic regression of column r. The
/// coordinate id of predictor s is s itself; id r is the intercept.
class RowEngine {
 public:
  RowEngine(const Design& d, const WeightMatrix& w, std::size_t r)
      : d_(d), w_(w), r_(r), n_(d.n), p_(d.p) {
    beta_.assign(p_, 0.0);
    trust_.assign(p_, 0.0);
    eta_.assign(n_, 0.0);
    expeta_.assign(n_, 1.0);
    mu_.assign(n_, 0.5);
    res_.assign(n_, 0.0);
    degenerate_ = d_.constant(r_);
    if (!degenerate_) {
      order_.push_back(static_cast<std::uint32_t>(r_));
      for (std::size_t s = 0; s < p_; ++s)
        if (s != r_ && !d_.constant(s))
          order_.push_back(static_cast<std::uint32_t>(s));
    }
    set_intercept_only();
  }

  bool degenerate() const { return degenerate_; }

  void set_intercept_only() {
    std::fill(beta_.begin(), beta_.end(), 0.0);
    beta_[r_] = d_.intercept_only(r_);
    std::fill(trust_.begin(), trust_.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) eta_[i] = beta_[r_];
    refresh();
  }

  const std::vector<double>& coefficients() const { return beta_; }

  const std::vector<std::uint32_t>& full_order() const { return order_; }

  std::vector<std::uint32_t> active_order() const {
    std::vector<std::uint32_t> out;
    for (auto c : order_)
      if (c == r_ || beta_[c] != 0.0) out.push_back(c);
    return out;
  }

  double gradient(std::size_t s) const {
    double g = 0.0;
    if (s == r_) {
      for (std::size_t i = 0; i < n_; ++i) g += res_[i];
      return g;
    }
    for (auto i : d_.ones[s]) g += res_[i];
    return g;
  }

  double curvature(std::size_t s, double width, bool bounded) const {
    double h = 0.0;
    const double c = std::exp(-width);
    auto term = [&](std::size_t i) {
      return bounded ? curvature_term(eta_[i], expeta_[i], width, c)
                     : mu_[i] * (1.0 - mu_[i]);
    };
    if (s == r_) {
      for (std::size_t i = 0; i < n_; ++i) h += term(i);
      return h;
    }
    for (auto i : d_.ones[s]) h += term(i);
    return h;
  }

  double update(std::uint32_t s, const SolverConfig& cfg) {
    double& width = trust_[s];
    if (width <= 0.0) width = cfg.step_cap;
    const double beta = beta_[s];
    const double penalty = s == r_ ? 0.0 : cfg.lambda * w_(r_, s);
    const double g = gradient(s);
    if (beta == 0.0 && penalty > 0.0 && std::abs(g) <= penalty) return 0.0;
    const double h =
        std::max(cfg.curvature_floor, curvature(s, width, cfg.bounded_curvature));
    const double next =
        std::clamp(penalized_newton_step(beta, g, h, penalty, width),
                   -kCoefficientCap, kCoefficientCap);
    const double delta = next - beta;
    if (delta == 0.0) return 0.0;
    const double factor = std::exp(delta);
    if (s == r_) {
      for (std::size_t i = 0; i < n_; ++i) shift(i, delta, factor);
    } else {
      for (auto i : d_.ones[s]) shift(i, delta, factor);
    }
    beta_[s] = next;
    width = std::min(cfg.step_cap, std::max(2.0 * std::abs(delta), width / 2.0));
    return std::abs(delta);
  }

  double objective(double lambda) const {
    double l = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      l += d_(i, r_) * eta_[i] - log1pexp(eta_[i]);
    double pen = 0.0;
    for (std::size_t s = 0; s < p_; ++s)
      if (s != r_ && beta_[s] != 0.0) pen += w_(r_, s) * std::abs(beta_[s]);
    return -l + lambda * pen;
  }

  void refresh() {
    for (std::size_t i = 0; i < n_; ++i) {
      expeta_[i] = std::exp(eta_[i]);
      mu_[i] = sigmoid(eta_[i]);
      res_[i] = d_(i, r_) - mu_[i];
    }
  }

 private:
  void shift(std::size_t i, double delta, double factor) {
    eta_[i] += delta;
    const double e = expeta_[i] * factor;
    if (e > 1e-200 && e < 1e200) {
      expeta_[i] = e;
      mu_[i] = e / (1.0 + e);
    } else {
      expeta_[i] = std::exp(eta_[i]);
      mu_[i] = sigmoid(eta_[i]);
    }
    res_[i] = d_(i, r_) - mu_[i];
  }

  const Design& d_;
  const WeightMatrix& w_;
  std::size_t r_, n_, p_;
  bool degenerate_ = false;
  std::vector<double> beta_, trust_, eta_, expeta_, mu_, res_;
  std::vector<std::uint32_t> order_;
};

inline void finish_rows(SepLogitResult& out, const Design& d) {
  for (std::size_t j = 0; j < d.p; ++j)
    if (d.constant(j)) {
      out.degenerate_columns.push_back(j);
      out.warnings.push_back("column " + std::to_string(j + 1) +
                             " is constant; fitted intercept-only");
    }
  if (!out.converged)
    out.warnings.push_back("max_iter reached before convergence in some row");
}

}  // namespace detail

/// Lasso logistic regression of column r on all other columns with
/// penalties lambda * w_rs. Returns the length-p coefficient row (entry r
/// is the intercept).
inline std::vector<double> fit_logistic_row(const BinaryMatrix& x,
                                            const WeightMatrix& w,
                                            const SolverConfig& cfg,
                                            std::size_t r) {
  cfg.validate();
  detail::check_fit_inputs(x, w);
  if (r >= x.cols()) throw ValidationError("row index out of range");
  detail::Design d(x);
  detail::RowEngine engine(d, w, r);
  FitResult status;
  detail::active_shooting(engine, cfg, status);
  return engine.coefficients();
}

/// Largest lambda at which some row still has a nonzero off-diagonal.
inline double seplogit_lambda_max(const BinaryMatrix& x, const WeightMatrix& w) {
  detail::check_fit_inputs(x, w);
  detail::Design d(x);
  double best = 0.0;
  for (std::size_t r = 0; r < d.p; ++r) {
    if (d.constant(r)) continue;
    detail::RowEngine engine(d, w, r);
    for (std::size_t s = 0; s < d.p; ++s)
      if (s != r && !d.constant(s))
        best = std::max(best, std::abs(engine.gradient(s)) / w(r, s));
  }
  return best;
}

/// Fits the rows along a descending grid, each row warm-started from its
/// previous grid point; at every lambda the rows run on up to `jobs`
/// threads. With `max_edges` > 0 the path stops after the first lambda whose
/// OR-rule edge count exceeds it, and the smaller lambdas come back with
/// `skipped` set. Results are in grid order.
inline std::vector<SepLogitResult> fit_seplogit_path(
    const BinaryMatrix& x, const WeightMatrix& w,
    const std::vector<double>& grid, SolverConfig cfg, int jobs = 1,
    std::size_t max_edges = 0) {
  cfg.validate();
  detail::check_fit_inputs(x, w);
  for (double l : grid) {
    cfg.lambda = l;
    cfg.validate();
  }
  detail::Design d(x);
  const std::size_t p = d.p;
  std::vector<std::size_t> order(grid.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return grid[a] > grid[b]; });

  std::vector<detail::RowEngine> engines;
  engines.reserve(p);
  for (std::size_t r = 0; r < p; ++r) engines.emplace_back(d, w, r);

  std::vector<SepLogitResult> out(grid.size());
  std::vector<int> sweeps(p);
  std::vector<std::uint8_t> conv(p);
  bool stopped = false;
  for (auto k : order) {
    auto& res = out[k];
    res.lambda = grid[k];
    if (stopped) {
      res.skipped = true;
      res.converged = false;
      continue;
    }
    res.B = AsymmetricMatrix(p);
    SolverConfig local = cfg;
    local.lambda = grid[k];
    parallel_for(p, jobs, [&](std::size_t r) {
      FitResult status;
      detail::active_shooting(engines[r], local, status);
      const auto& beta = engines[r].coefficients();
      std::copy(beta.begin(), beta.end(), res.B.row(r));
      sweeps[r] = status.sweeps;
      conv[r] = status.converged ? 1 : 0;
    });
    for (std::size_t r = 0; r < p; ++r) {
      res.sweeps = std::max(res.sweeps, sweeps[r]);
      res.converged = res.converged && conv[r];
    }
    detail::finish_rows(res, d);
    stopped = max_edges > 0 && reconcile(res.B, Rule::Or).size() > max_edges;
  }
  return out;
}

inline SepLogitResult fit_seplogit(const BinaryMatrix& x, const WeightMatrix& w,
                                   const SolverConfig& cfg, int jobs = 1) {
  return std::move(fit_seplogit_path(x, w, {cfg.lambda}, cfg, jobs).front());
}

}  // namespace logitnet
