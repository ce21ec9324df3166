#pragma once

// LogitNet estimator: p logistic regressions sharing one symmetric
// coefficient matrix, fitted under a weighted l1 penalty on the
// off-diagonal entries by one-step-Newton coordinate descent with
// active shooting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "logitnet/core.hpp"

namespace logitnet {

/// Box on every coefficient. Keeps separable designs (most visibly the
/// unpenalized refits) from drifting towards infinity; a fit touching it is
/// flagged.
inline constexpr double kCoefficientCap = 15.0;

struct SolverConfig {
  double lambda = 0.0;
  double tol = 1e-6;
  int max_iter = 500;  // full sweeps
  double step_cap = 1.0;
  double curvature_floor = 1e-4;
  /// Replace l'' in the Newton step by its upper bound over the coordinate's
  /// trust region (width <= step_cap). With this on, every coordinate step
  /// is a majorize-minimize step and the penalized loss never increases.
  bool bounded_curvature = true;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw ValidationError("lambda must be a finite value >= 0");
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    if (!(step_cap > 0.0)) throw ValidationError("step_cap must be > 0");
    if (!(curvature_floor > 0.0))
      throw ValidationError("curvature_floor must be > 0");
  }
};

struct FitResult {
  CoefMatrix B;
  bool converged = false;
  int sweeps = 0;
  double lambda = 0.0;
  double penalized_loss = 0.0;
  double loglik = 0.0;
  /// Penalized loss after each full sweep.
  std::vector<double> loss_history;
  /// Columns with no variation; fitted intercept-only.
  std::vector<std::size_t> degenerate_columns;
  /// Some coefficient sits on the +-kCoefficientCap box.
  bool boundary = false;
  /// Set on path entries never fitted because the path stopped early.
  bool skipped = false;
  std::vector<std::string> warnings;
};

struct Derivatives {
  double first = 0.0;   // d l / d beta_rs
  double second = 0.0;  // -d^2 l / d beta_rs^2, always > 0
};

namespace detail {

inline double log1pexp(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Upper bound of sigmoid'(eta + t) over |t| <= width.
inline double curvature_bound(double eta, double width) {
  const double a = std::abs(eta);
  if (a <= width) return 0.25;
  return 1.0 / (2.0 + std::exp(a - width) + std::exp(width - a));
}

/// The same bound from a cached exp(eta), with c = exp(-width): outside the
/// band |eta| <= width it is 1 / (2 + E c + 1 / (E c)), E = exp(|eta|).
inline double curvature_term(double eta, double expeta, double width,
                             double c) {
  if (std::abs(eta) <= width) return 0.25;
  const double ec = (eta > 0 ? expeta : 1.0 / expeta) * c;
  return 1.0 / (2.0 + ec + 1.0 / ec);
}

inline double clamp_step(double step, double cap) {
  return std::clamp(step, -cap, cap);
}

/// One penalized Newton step on a single coordinate.
///
/// `grad` is d l / d beta (log-likelihood, so ascent direction), `curv` the
/// positive curvature, `penalty` the l1 multiplier (lambda * w), `cap` the
/// largest allowed move. A nonzero coefficient whose step would cross zero
/// lands on exactly 0. From 0 both signs are tried; convexity allows at
/// most one to keep its assumed sign.
inline double penalized_newton_step(double beta, double grad, double curv,
                                    double penalty, double cap) {
  if (penalty == 0.0) return beta + clamp_step(grad / curv, cap);
  if (beta != 0.0) {
    const double sgn = beta > 0 ? 1.0 : -1.0;
    const double next = beta + clamp_step((grad - penalty * sgn) / curv, cap);
    return next * sgn > 0 ? next : 0.0;
  }
  if (grad > penalty) return clamp_step((grad - penalty) / curv, cap);
  if (grad < -penalty) return clamp_step((grad + penalty) / curv, cap);
  return 0.0;
}

/// Row indices holding a 1, per column.
struct Design {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<std::vector<std::uint32_t>> ones;
  std::vector<std::uint8_t> values;  // column-major copy

  explicit Design(const BinaryMatrix& x) : n(x.rows()), p(x.cols()), ones(p) {
    values.resize(n * p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto* col = x.column(j);
      for (std::size_t i = 0; i < n; ++i) {
        values[j * n + i] = col[i];
        if (col[i]) ones[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }

  std::uint8_t operator()(std::size_t i, std::size_t j) const {
    return values[j * n + i];
  }
  bool constant(std::size_t j) const {
    return ones[j].empty() || ones[j].size() == n;
  }
  double mean(std::size_t j) const {
    return static_cast<double>(ones[j].size()) / static_cast<double>(n);
  }
  double intercept_only(std::size_t j) const {
    const double m = mean(j);
    if (m <= 0.0) return -kCoefficientCap;
    if (m >= 1.0) return kCoefficientCap;
    return std::clamp(std::log(m / (1.0 - m)), -kCoefficientCap, kCoefficientCap);
  }
};

/// Alternates sweeps over the active set with full sweeps until a full sweep
/// moves no coefficient by more than tol.
template <class Engine>
void active_shooting(Engine& engine, const SolverConfig& cfg, FitResult& out) {
  const auto& all = engine.full_order();
  out.loss_history.clear();
  out.sweeps = 0;
  out.converged = false;
  while (out.sweeps < cfg.max_iter) {
    engine.refresh();
    const auto active = engine.active_order();
    for (int k = 0; k < cfg.max_iter; ++k) {
      double change = 0.0;
      for (auto c : active) change = std::max(change, engine.update(c, cfg));
      if (change < cfg.tol) break;
    }
    double change = 0.0;
    for (auto c : all) change = std::max(change, engine.update(c, cfg));
    ++out.sweeps;
    out.loss_history.push_back(engine.objective(cfg.lambda));
    if (change < cfg.tol) {
      out.converged = true;
      break;
    }
  }
}

/// Coordinate-descent state for the symmetric joint model. Coordinate ids
/// index `pairs_all_`: the p intercepts first, then off-diagonal pairs in
/// lexicographic order.
class SymmetricEngine {
 public:
  /// With `pin_degenerate`, constant columns are held at the intercept-only
  /// fit and excluded from the sweeps.
  SymmetricEngine(const Design& d, const WeightMatrix& w,
                  bool pin_degenerate = true)
      : d_(d), w_(w), n_(d.n), p_(d.p), B_(d.p, 0.0) {
    eta_.assign(n_ * p_, 0.0);
    expeta_.assign(n_ * p_, 1.0);
    mu_.assign(n_ * p_, 0.0);
    res_.assign(n_ * p_, 0.0);
    for (std::size_t j = 0; j < p_; ++j)
      if (pin_degenerate && d_.constant(j)) degenerate_.push_back(j);
    frozen_col_.assign(p_, 0);
    for (auto j : degenerate_) frozen_col_[j] = 1;
    allowed_.assign(p_ * (p_ + 1) / 2, 1);
    rebuild_order();
  }

  /// Restrict the free off-diagonal coordinates to `support`, optionally
  /// leaving them unpenalized. Everything else is pinned to 0.
  void restrict_to(const EdgeSet& support, bool unpenalized) {
    std::fill(allowed_.begin(), allowed_.end(), 0);
    for (const auto& [r, s] : support.edges) allowed_[pidx(r, s)] = 1;
    unpenalized_ = unpenalized;
    rebuild_order();
  }

  void set_coefficients(const CoefMatrix& b) {
    B_ = b;
    for (auto j : degenerate_) {
      B_(j, j) = d_.intercept_only(j);
      for (std::size_t s = 0; s < p_; ++s)
        if (s != j) B_(j, s) = 0.0;
    }
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t s = r + 1; s < p_; ++s)
        if (!allowed_[pidx(r, s)]) B_(r, s) = 0.0;
    trust_.assign(pairs_all_.size(), 0.0);
    recompute_state();
  }

  void set_intercept_only() {
    CoefMatrix b(p_, 0.0);
    for (std::size_t j = 0; j < p_; ++j) b(j, j) = d_.intercept_only(j);
    set_coefficients(b);
  }

  const CoefMatrix& coefficients() const { return B_; }
  const std::vector<std::size_t>& degenerate() const { return degenerate_; }

  const std::vector<std::uint32_t>& full_order() const { return order_; }

  std::vector<std::uint32_t> active_order() const {
    std::vector<std::uint32_t> out;
    for (auto c : order_) {
      const auto [r, s] = pairs_all_[c];
      if (r == s || B_(r, s) != 0.0) out.push_back(c);
    }
    return out;
  }

  double penalty_weight(std::size_t r, std::size_t s, double lambda) const {
    if (r == s || unpenalized_) return 0.0;
    return lambda * w_(r, s);
  }

  Derivatives derivatives(std::size_t r, std::size_t s) const {
    Derivatives dv;
    if (r == s) {
      const double* res = &res_[r * n_];
      const double* mu = &mu_[r * n_];
      for (std::size_t i = 0; i < n_; ++i) {
        dv.first += res[i];
        dv.second += mu[i] * (1.0 - mu[i]);
      }
      return dv;
    }
    accumulate(r, s, dv);
    accumulate(s, r, dv);
    return dv;
  }

  double gradient(std::size_t r, std::size_t s) const {
    if (r == s) {
      double g = 0.0;
      const double* res = &res_[r * n_];
      for (std::size_t i = 0; i < n_; ++i) g += res[i];
      return g;
    }
    double g = 0.0;
    const double* rr = &res_[r * n_];
    for (auto i : d_.ones[s]) g += rr[i];
    const double* rs = &res_[s * n_];
    for (auto i : d_.ones[r]) g += rs[i];
    return g;
  }

  double curvature(std::size_t r, std::size_t s, double width,
                   bool bounded) const {
    if (!bounded) {
      double h = 0.0;
      if (r == s) {
        const double* mu = &mu_[r * n_];
        for (std::size_t i = 0; i < n_; ++i) h += mu[i] * (1.0 - mu[i]);
        return h;
      }
      const double* mr = &mu_[r * n_];
      for (auto i : d_.ones[s]) h += mr[i] * (1.0 - mr[i]);
      const double* ms = &mu_[s * n_];
      for (auto i : d_.ones[r]) h += ms[i] * (1.0 - ms[i]);
      return h;
    }
    const double c = std::exp(-width);
    auto term = [&](std::size_t k) {
      return curvature_term(eta_[k], expeta_[k], width, c);
    };
    double h = 0.0;
    if (r == s) {
      for (std::size_t i = 0; i < n_; ++i) h += term(r * n_ + i);
      return h;
    }
    for (auto i : d_.ones[s]) h += term(r * n_ + i);
    for (auto i : d_.ones[r]) h += term(s * n_ + i);
    return h;
  }

  /// Proposed new value for coordinate (r, s) without applying it.
  double propose(std::size_t r, std::size_t s, const SolverConfig& cfg,
                 double width) const {
    const double beta = B_(r, s);
    const double penalty = penalty_weight(r, s, cfg.lambda);
    const double g = gradient(r, s);
    // A zero coordinate that cannot move in either direction needs no
    // curvature.
    if (beta == 0.0 && penalty > 0.0 && std::abs(g) <= penalty) return 0.0;
    const double h = std::max(cfg.curvature_floor,
                              curvature(r, s, width, cfg.bounded_curvature));
    return penalized_newton_step(beta, g, h, penalty, width);
  }

  double update(std::uint32_t c, const SolverConfig& cfg) {
    const auto [r, s] = pairs_all_[c];
    double& width = trust_[c];
    if (width <= 0.0) width = cfg.step_cap;
    const double beta = B_(r, s);
    const double next =
        std::clamp(propose(r, s, cfg, width), -kCoefficientCap, kCoefficientCap);
    const double delta = next - beta;
    if (delta == 0.0) return 0.0;
    apply(r, s, delta);
    B_(r, s) = next;
    width = std::min(cfg.step_cap, std::max(2.0 * std::abs(delta), width / 2.0));
    return std::abs(delta);
  }

  double loglik() const {
    double l = 0.0;
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t i = 0; i < n_; ++i) {
        const double e = eta_[r * n_ + i];
        l += d_(i, r) * e - log1pexp(e);
      }
    return l;
  }

  double penalty(double lambda) const {
    if (unpenalized_ || lambda == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t c = r + 1; c < p_; ++c)
        if (B_(r, c) != 0.0) s += w_(r, c) * std::abs(B_(r, c));
    return lambda * s;
  }

  double objective(double lambda) const { return -loglik() + penalty(lambda); }

  /// Re-derives exp(eta), mu and residuals from eta, dropping the rounding
  /// drift of the multiplicative updates.
  void refresh() {
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t i = 0; i < n_; ++i) set_eta(r, i, eta_[r * n_ + i]);
  }

 private:
  std::size_t pidx(std::size_t r, std::size_t s) const {
    if (r > s) std::swap(r, s);
    return r * p_ - (r * (r - 1)) / 2 + (s - r);
  }

  void accumulate(std::size_t reg, std::size_t pred, Derivatives& dv) const {
    const double* res = &res_[reg * n_];
    const double* mu = &mu_[reg * n_];
    for (auto i : d_.ones[pred]) {
      dv.first += res[i];
      dv.second += mu[i] * (1.0 - mu[i]);
    }
  }

  void rebuild_order() {
    pairs_all_.clear();
    for (std::size_t r = 0; r < p_; ++r)
      pairs_all_.emplace_back(static_cast<std::uint32_t>(r),
                              static_cast<std::uint32_t>(r));
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t s = r + 1; s < p_; ++s)
        pairs_all_.emplace_back(static_cast<std::uint32_t>(r),
                                static_cast<std::uint32_t>(s));
    order_.clear();
    for (std::uint32_t c = 0; c < pairs_all_.size(); ++c) {
      const auto [r, s] = pairs_all_[c];
      if (frozen_col_[r] || frozen_col_[s]) continue;
      if (r != s && !allowed_[pidx(r, s)]) continue;
      order_.push_back(c);
    }
    trust_.assign(pairs_all_.size(), 0.0);
  }

  void set_eta(std::size_t reg, std::size_t i, double e) {
    const std::size_t k = reg * n_ + i;
    eta_[k] = e;
    expeta_[k] = std::exp(e);
    mu_[k] = sigmoid(e);
    res_[k] = d_(i, reg) - mu_[k];
  }

  // Shifts eta by delta using a cached exp(delta); falls back to a direct
  // evaluation once exp(eta) leaves the comfortable double range.
  void shift_eta(std::size_t reg, std::size_t i, double delta, double factor) {
    const std::size_t k = reg * n_ + i;
    eta_[k] += delta;
    const double e = expeta_[k] * factor;
    if (e > 1e-200 && e < 1e200) {
      expeta_[k] = e;
      mu_[k] = e / (1.0 + e);
    } else {
      expeta_[k] = std::exp(eta_[k]);
      mu_[k] = sigmoid(eta_[k]);
    }
    res_[k] = d_(i, reg) - mu_[k];
  }

  void apply(std::size_t r, std::size_t s, double delta) {
    const double factor = std::exp(delta);
    if (r == s) {
      for (std::size_t i = 0; i < n_; ++i) shift_eta(r, i, delta, factor);
      return;
    }
    for (auto i : d_.ones[s]) shift_eta(r, i, delta, factor);
    for (auto i : d_.ones[r]) shift_eta(s, i, delta, factor);
  }

  void recompute_state() {
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t i = 0; i < n_; ++i) eta_[r * n_ + i] = B_(r, r);
    for (std::size_t r = 0; r < p_; ++r)
      for (std::size_t s = r + 1; s < p_; ++s) {
        const double b = B_(r, s);
        if (b == 0.0) continue;
        for (auto i : d_.ones[s]) eta_[r * n_ + i] += b;
        for (auto i : d_.ones[r]) eta_[s * n_ + i] += b;
      }
    refresh();
  }

  const Design& d_;
  const WeightMatrix& w_;
  std::size_t n_, p_;
  CoefMatrix B_;
  std::vector<double> eta_, expeta_, mu_, res_;
  std::vector<double> trust_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_all_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint8_t> allowed_;
  std::vector<std::uint8_t> frozen_col_;
  std::vector<std::size_t> degenerate_;
  bool unpenalized_ = false;
};

inline void check_fit_inputs(const BinaryMatrix& x, const WeightMatrix& w) {
  x.validate();
  require_complete(x, "fit");
  w.validate(x.cols());
}

inline void finish(const SymmetricEngine& engine, const SolverConfig& cfg,
                   FitResult& out) {
  out.B = engine.coefficients();
  out.lambda = cfg.lambda;
  out.loglik = engine.loglik();
  out.penalized_loss = -out.loglik + engine.penalty(cfg.lambda);
  out.degenerate_columns = engine.degenerate();
  for (auto j : out.degenerate_columns)
    out.warnings.push_back("column " + std::to_string(j + 1) +
                           " is constant; fitted intercept-only");
  if (!out.converged)
    out.warnings.push_back("max_iter reached before convergence");
  // Pinned constant columns sit on the box by construction; only free
  // coefficients count.
  std::vector<std::uint8_t> pinned(out.B.size(), 0);
  for (auto j : out.degenerate_columns) pinned[j] = 1;
  out.boundary = false;
  for (std::size_t r = 0; r < out.B.size(); ++r)
    for (std::size_t s = r; s < out.B.size(); ++s)
      if (std::abs(out.B(r, s)) >= kCoefficientCap && !(r == s && pinned[r]))
        out.boundary = true;
  if (out.boundary)
    out.warnings.push_back("a coefficient reached the +-15 box (separation)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Likelihood and derivatives
// ---------------------------------------------------------------------------

/// Joint log-likelihood of the p logistic regressions sharing B.
inline double joint_loglik(const CoefMatrix& b, const BinaryMatrix& x) {
  require_complete(x, "joint_loglik");
  if (b.size() != x.cols())
    throw ValidationError("coefficient matrix dimension does not match p");
  const std::size_t n = x.rows(), p = x.cols();
  std::vector<std::vector<std::pair<std::size_t, double>>> nz(p);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t s = r + 1; s < p; ++s)
      if (b(r, s) != 0.0) {
        nz[r].emplace_back(s, b(r, s));
        nz[s].emplace_back(r, b(r, s));
      }
  double l = 0.0;
  for (std::size_t r = 0; r < p; ++r) {
    const auto* xr = x.column(r);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = b(r, r);
      for (const auto& [s, v] : nz[r]) eta += x(i, s) * v;
      l += xr[i] * eta - detail::log1pexp(eta);
    }
  }
  return l;
}

/// -loglik + lambda * sum_{r<s} w_rs |beta_rs|.
inline double penalized_loss(const CoefMatrix& b, const BinaryMatrix& x,
                             const WeightMatrix& w, double lambda) {
  double pen = 0.0;
  for (std::size_t r = 0; r < b.size(); ++r)
    for (std::size_t s = r + 1; s < b.size(); ++s)
      pen += w(r, s) * std::abs(b(r, s));
  return -joint_loglik(b, x) + lambda * pen;
}

/// First derivative of the joint log-likelihood in beta_rs and the positive
/// curvature -d^2/d beta_rs^2. Off-diagonal coordinates collect one term
/// from regression r and one from regression s.
inline Derivatives partial_derivatives(const CoefMatrix& b,
                                       const BinaryMatrix& x, std::size_t r,
                                       std::size_t s) {
  require_complete(x, "partial_derivatives");
  detail::Design d(x);
  WeightMatrix unit(x.cols());
  detail::SymmetricEngine engine(d, unit, /*pin_degenerate=*/false);
  engine.set_coefficients(b);
  return engine.derivatives(r, s);
}

/// One coordinate step on beta_rs from the current B; B is not modified.
inline double coordinate_update(const CoefMatrix& b, const BinaryMatrix& x,
                                const WeightMatrix& w, const SolverConfig& cfg,
                                std::size_t r, std::size_t s) {
  cfg.validate();
  detail::check_fit_inputs(x, w);
  detail::Design d(x);
  detail::SymmetricEngine engine(d, w);
  engine.set_coefficients(b);
  return engine.propose(r, s, cfg, cfg.step_cap);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Smallest lambda at which every off-diagonal coefficient is 0: the
/// largest |dl/dbeta_rs| / w_rs at the intercept-only fit.
inline double lambda_max(const BinaryMatrix& x, const WeightMatrix& w) {
  detail::check_fit_inputs(x, w);
  detail::Design d(x);
  detail::SymmetricEngine engine(d, w);
  engine.set_intercept_only();
  double best = 0.0;
  for (std::size_t r = 0; r < d.p; ++r) {
    if (d.constant(r)) continue;
    for (std::size_t s = r + 1; s < d.p; ++s) {
      if (d.constant(s)) continue;
      best = std::max(best, std::abs(engine.gradient(r, s)) / w(r, s));
    }
  }
  return best;
}

/// Grid positions ordered from the largest lambda to the smallest (stable).
inline std::vector<std::size_t> descending_order(const std::vector<double>& grid) {
  std::vector<std::size_t> order(grid.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return grid[a] > grid[b]; });
  return order;
}

/// `size` values log-spaced from `top` down to `ratio * top`.
inline std::vector<double> lambda_grid(double top, int size = 50,
                                       double ratio = 0.01) {
  if (size < 1) throw ValidationError("grid size must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(size));
  if (size == 1) {
    g[0] = top;
    return g;
  }
  const double lo = std::log(ratio);
  for (int k = 0; k < size; ++k)
    g[static_cast<std::size_t>(k)] =
        top * std::exp(lo * static_cast<double>(k) / (size - 1));
  return g;
}

inline FitResult fit(const BinaryMatrix& x, const WeightMatrix& w,
                     const SolverConfig& cfg,
                     const std::optional<CoefMatrix>& init = std::nullopt) {
  cfg.validate();
  detail::check_fit_inputs(x, w);
  detail::Design d(x);
  detail::SymmetricEngine engine(d, w);
  if (init) {
    if (init->size() != x.cols())
      throw ValidationError("initial coefficient matrix dimension mismatch");
    engine.set_coefficients(*init);
  } else {
    engine.set_intercept_only();
  }
  FitResult out;
  detail::active_shooting(engine, cfg, out);
  detail::finish(engine, cfg, out);
  return out;
}

/// Warm-started fits at a sequence of lambdas on one dataset. Each call to
/// `fit_at` starts from the previous solution (intercept-only at first).
class PathSolver {
 public:
  PathSolver(const BinaryMatrix& x, const WeightMatrix& w, SolverConfig cfg)
      : cfg_(cfg), w_(w), design_((detail::check_fit_inputs(x, w), x)) {
    cfg_.validate();
    engine_.emplace(design_, w_);
    engine_->set_intercept_only();
  }
  PathSolver(const PathSolver&) = delete;
  PathSolver& operator=(const PathSolver&) = delete;

  FitResult fit_at(double lambda) {
    cfg_.lambda = lambda;
    cfg_.validate();
    FitResult out;
    detail::active_shooting(*engine_, cfg_, out);
    detail::finish(*engine_, cfg_, out);
    return out;
  }

 private:
  SolverConfig cfg_;
  WeightMatrix w_;
  detail::Design design_;
  std::optional<detail::SymmetricEngine> engine_;
};

/// Fits along a grid, warm-starting each point from the previous one. The
/// grid is visited in descending order; results come back in grid order.
/// With `max_edges` > 0 the path stops after the first fit with more edges
/// than that; the smaller lambdas are returned with `skipped` set.
inline std::vector<FitResult> fit_path(const BinaryMatrix& x,
                                       const WeightMatrix& w,
                                       const std::vector<double>& grid,
                                       SolverConfig cfg,
                                       std::size_t max_edges = 0) {
  for (double l : grid) {
    cfg.lambda = l;
    cfg.validate();
  }
  PathSolver solver(x, w, cfg);
  std::vector<FitResult> out(grid.size());
  bool stopped = false;
  for (auto k : descending_order(grid)) {
    if (stopped) {
      out[k].lambda = grid[k];
      out[k].skipped = true;
      continue;
    }
    out[k] = solver.fit_at(grid[k]);
    stopped = max_edges > 0 &&
              count_off_diagonal_nonzeros(out[k].B) > max_edges;
  }
  return out;
}

/// Weight matrix of the un-shrunk refit: 1 on the support, max(w) elsewhere.
inline WeightMatrix unshrunk_weights(const EdgeSet& support,
                                     const WeightMatrix& w) {
  const double top = w.max_off_diagonal();
  WeightMatrix out(w.size());
  for (std::size_t r = 0; r < w.size(); ++r)
    for (std::size_t s = r + 1; s < w.size(); ++s)
      out(r, s) = support.contains(r, s) ? 1.0 : top;
  return out;
}

/// Refit on a fixed support with the penalty removed. This is the limit of
/// the weighted refit with weights `unshrunk_weights(support, w)`: support
/// pairs carry no shrinkage and every other pair is held at exactly 0.
/// `init` (typically the shrunk fit that produced the support) only sets the
/// starting point; entries off the support are ignored.
inline FitResult refit_unshrunk(const BinaryMatrix& x, const EdgeSet& support,
                                const WeightMatrix& w, SolverConfig cfg,
                                const std::optional<CoefMatrix>& init =
                                    std::nullopt) {
  detail::check_fit_inputs(x, w);
  support.validate(x.cols());
  cfg.lambda = 0.0;
  cfg.validate();
  detail::Design d(x);
  const WeightMatrix tilde = unshrunk_weights(support, w);
  detail::SymmetricEngine engine(d, tilde);
  engine.restrict_to(support, /*unpenalized=*/true);
  if (init) {
    if (init->size() != x.cols())
      throw ValidationError("initial coefficient matrix dimension mismatch");
    engine.set_coefficients(*init);
  } else {
    engine.set_intercept_only();
  }
  FitResult out;
  detail::active_shooting(engine, cfg, out);
  detail::finish(engine, cfg, out);
  if (support.size() >= x.rows())
    out.warnings.push_back("support size " + std::to_string(support.size()) +
                           " >= n; un-shrunk refit is ill-posed");
  return out;
}

}  // namespace logitnet
