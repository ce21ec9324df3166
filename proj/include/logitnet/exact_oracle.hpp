#pragma once

// Exact enumeration of the quadratic exponential model
//   Pr(X = x) = exp(x'theta + sum_{r<s} kappa_rs x_r x_s) / Delta
// over all 2^p binary states. Intended for small p only: it is the ground
// truth the pseudo-likelihood solver is checked against.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "logitnet/core.hpp"

namespace logitnet::oracle {

inline constexpr std::size_t kMaxEnumerationP = 20;
inline constexpr std::size_t kMaxMleP = 10;
inline constexpr double kParameterCap = 15.0;

struct QuadExpModel {
  std::vector<double> theta;
  SymmetricMatrix kappa;  // diagonal unused

  QuadExpModel() = default;
  explicit QuadExpModel(std::size_t p) : theta(p, 0.0), kappa(p, 0.0) {}

  std::size_t p() const { return theta.size(); }
};

namespace detail {

inline void check_enumerable(const QuadExpModel& m) {
  if (m.p() < 2) throw ValidationError("model needs p >= 2");
  if (m.p() > kMaxEnumerationP)
    throw ValidationError("exact enumeration refused for p = " +
                          std::to_string(m.p()) + " > " +
                          std::to_string(kMaxEnumerationP));
}

/// Bit k of the state index (most significant first) is x_{k}, so states
/// are visited in lexicographic order of (x_1, ..., x_p).
inline int state_bit(std::uint32_t state, std::size_t p, std::size_t k) {
  return static_cast<int>((state >> (p - 1 - k)) & 1u);
}

inline double log_weight_of_state(const QuadExpModel& m, std::uint32_t state) {
  const std::size_t p = m.p();
  double e = 0.0;
  for (std::size_t r = 0; r < p; ++r) {
    if (!state_bit(state, p, r)) continue;
    e += m.theta[r];
    for (std::size_t s = r + 1; s < p; ++s)
      if (state_bit(state, p, s)) e += m.kappa(r, s);
  }
  return e;
}

/// Kahan-compensated sum in extended precision.
class CompensatedSum {
 public:
  void add(long double v) {
    long double y = v - carry_;
    long double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  long double value() const { return sum_; }

 private:
  long double sum_ = 0.0L;
  long double carry_ = 0.0L;
};

}  // namespace detail

/// Probabilities of all 2^p states in lexicographic order.
inline std::vector<double> state_probabilities(const QuadExpModel& m) {
  detail::check_enumerable(m);
  const std::uint32_t count = 1u << m.p();
  std::vector<double> logw(count);
  double top = -INFINITY;
  for (std::uint32_t k = 0; k < count; ++k) {
    logw[k] = detail::log_weight_of_state(m, k);
    top = std::max(top, logw[k]);
  }
  detail::CompensatedSum delta;
  for (double lw : logw) delta.add(std::exp(static_cast<long double>(lw - top)));
  std::vector<double> prob(count);
  for (std::uint32_t k = 0; k < count; ++k)
    prob[k] = static_cast<double>(
        std::exp(static_cast<long double>(logw[k] - top)) / delta.value());
  return prob;
}

inline std::uint32_t state_index(std::span<const int> x) {
  std::uint32_t k = 0;
  for (int v : x) {
    if (v != 0 && v != 1) throw ValidationError("state entries must be 0/1");
    k = (k << 1) | static_cast<std::uint32_t>(v);
  }
  return k;
}

inline double joint_probability(const QuadExpModel& m, std::span<const int> x) {
  detail::check_enumerable(m);
  if (x.size() != m.p())
    throw ValidationError("state length does not match model p");
  return state_probabilities(m)[state_index(x)];
}

/// log OR of (X_r, X_s) given the other loci fixed at `cond` (entries at r
/// and s are ignored). Computed from enumerated joint probabilities.
inline double conditional_log_odds_ratio(const QuadExpModel& m, std::size_t r,
                                         std::size_t s,
                                         std::span<const int> cond) {
  detail::check_enumerable(m);
  if (r == s) throw ValidationError("conditional odds ratio needs r != s");
  if (r >= m.p() || s >= m.p()) throw ValidationError("locus out of range");
  if (cond.size() != m.p())
    throw ValidationError("conditioning vector length does not match p");
  const auto prob = state_probabilities(m);
  std::vector<int> x(cond.begin(), cond.end());
  auto pr = [&](int a, int b) {
    x[r] = a;
    x[s] = b;
    return prob[state_index(x)];
  };
  const double p11 = pr(1, 1), p00 = pr(0, 0), p10 = pr(1, 0), p01 = pr(0, 1);
  if (!(p11 > 0 && p00 > 0 && p10 > 0 && p01 > 0))
    throw Error("zero conditional probability in odds ratio");
  return (std::log(p11) + std::log(p00)) - (std::log(p10) + std::log(p01));
}

/// n independent draws from the model, rows in sampling order.
template <class Rng>
BinaryMatrix sample(const QuadExpModel& m, std::size_t n, Rng& rng) {
  const auto prob = state_probabilities(m);
  std::discrete_distribution<std::uint32_t> pick(prob.begin(), prob.end());
  BinaryMatrix x(n, m.p());
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = pick(rng);
    for (std::size_t j = 0; j < m.p(); ++j)
      x.set(i, j, detail::state_bit(k, m.p(), j));
  }
  return x;
}

// ---------------------------------------------------------------------------
// Exact maximum likelihood
// ---------------------------------------------------------------------------

struct MleResult {
  QuadExpModel model;
  bool converged = false;
  bool boundary = false;  // some parameter sits at the +-15 cap
  int iterations = 0;
  double gradient_max_norm = 0.0;
  double loglik = 0.0;
};

namespace detail {

// Parameter vector layout: theta_1..theta_p, then kappa_rs for r<s in
// lexicographic order.
inline QuadExpModel unpack(const Eigen::VectorXd& v, std::size_t p) {
  QuadExpModel m(p);
  std::size_t k = 0;
  for (; k < p; ++k) m.theta[k] = v[k];
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t s = r + 1; s < p; ++s) m.kappa(r, s) = v[k++];
  return m;
}

inline Eigen::VectorXd features(std::uint32_t state, std::size_t p) {
  Eigen::VectorXd f(p + p * (p - 1) / 2);
  std::size_t k = 0;
  for (; k < p; ++k) f[k] = state_bit(state, p, k);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t s = r + 1; s < p; ++s)
      f[k++] = state_bit(state, p, r) * state_bit(state, p, s);
  return f;
}

struct LikelihoodTerms {
  double loglik;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;  // n * Cov(features)
};

inline LikelihoodTerms exact_terms(const Eigen::VectorXd& params,
                                   const Eigen::VectorXd& totals, double n,
                                   std::size_t p) {
  const auto model = unpack(params, p);
  const auto prob = state_probabilities(model);
  const std::uint32_t count = 1u << p;
  const auto dim = params.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(dim, dim);
  double top = -INFINITY;
  std::vector<double> logw(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    logw[k] = log_weight_of_state(model, k);
    top = std::max(top, logw[k]);
  }
  CompensatedSum delta;
  for (double lw : logw) delta.add(std::exp(static_cast<long double>(lw - top)));
  const double log_delta =
      top + static_cast<double>(std::log(delta.value()));
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto f = features(k, p);
    mean += prob[k] * f;
    second += prob[k] * f * f.transpose();
  }
  LikelihoodTerms t;
  t.loglik = totals.dot(params) - n * log_delta;
  t.gradient = totals - n * mean;
  t.information = n * (second - mean * mean.transpose());
  return t;
}

}  // namespace detail

/// Maximizes the exact likelihood by projected Newton with backtracking.
/// Parameters are boxed to [-15, 15]; a result touching the box is flagged
/// `boundary` rather than reported as an interior optimum.
inline MleResult exact_mle(const BinaryMatrix& data, int max_iter = 200,
                           double grad_tol = 1e-9) {
  require_complete(data, "exact_mle");
  const std::size_t p = data.cols();
  if (p > kMaxMleP)
    throw ValidationError("exact_mle limited to p <= " +
                          std::to_string(kMaxMleP));
  const std::size_t dim = p + p * (p - 1) / 2;
  const double n = static_cast<double>(data.rows());

  Eigen::VectorXd totals = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::uint32_t state = 0;
    for (std::size_t j = 0; j < p; ++j) state = (state << 1) | data(i, j);
    totals += detail::features(state, p);
  }

  Eigen::VectorXd params = Eigen::VectorXd::Zero(dim);
  MleResult res;
  auto at_bound = [&](Eigen::Index k, const Eigen::VectorXd& g) {
    return std::abs(params[k]) >= kParameterCap &&
           g[k] * params[k] > 0.0;  // gradient pushes further outward
  };
  auto projected_norm = [&](const Eigen::VectorXd& g) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k)
      if (!at_bound(k, g)) worst = std::max(worst, std::abs(g[k]));
    return worst;
  };

  auto terms = detail::exact_terms(params, totals, n, p);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (projected_norm(terms.gradient) < grad_tol) {
      res.converged = true;
      break;
    }
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(dim); ++k)
      if (!at_bound(k, terms.gradient)) free.push_back(k);
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd h(nf, nf);
    Eigen::VectorXd g(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      g[a] = terms.gradient[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b)
        h(a, b) = terms.information(free[a], free[b]);
    }
    h.diagonal().array() += 1e-12 * n;
    Eigen::VectorXd step = h.ldlt().solve(g);

    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 60; ++half, scale *= 0.5) {
      Eigen::VectorXd trial = params;
      for (Eigen::Index a = 0; a < nf; ++a)
        trial[free[a]] = std::clamp(trial[free[a]] + scale * step[a],
                                    -kParameterCap, kParameterCap);
      auto next = detail::exact_terms(trial, totals, n, p);
      if (next.loglik >= terms.loglik - 1e-12 * std::abs(terms.loglik)) {
        params = trial;
        terms = std::move(next);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  res.model = detail::unpack(params, p);
  res.gradient_max_norm = projected_norm(terms.gradient);
  res.converged = res.converged || res.gradient_max_norm < grad_tol;
  res.loglik = terms.loglik;
  for (Eigen::Index k = 0; k < params.size(); ++k)
    if (std::abs(params[k]) >= kParameterCap) res.boundary = true;
  return res;
}

}  // namespace logitnet::oracle
