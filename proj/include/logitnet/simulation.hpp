#pragma once

// Synthetic genomic-instability data: a stationary two-state Markov
// background along each chromosome, overlaid with aberrations at disease
// loci that follow an oncogenic pathway (a forest of events).

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "logitnet/core.hpp"

namespace logitnet::sim {

struct BackgroundParams {
  double delta = 0.05;  // stationary aberration probability
  double nu = 15.0;     // dependence-strength rate
  std::size_t loci_per_chrom = 100;
  std::size_t n_chrom = 6;

  std::size_t p() const { return loci_per_chrom * n_chrom; }
  /// Distance between adjacent loci on a unit-length chromosome.
  double spacing() const { return 1.0 / static_cast<double>(loci_per_chrom); }

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0))
      throw ValidationError("delta must lie in (0, 1)");
    if (!(nu > 0.0)) throw ValidationError("nu must be > 0");
    if (loci_per_chrom < 1 || n_chrom < 1)
      throw ValidationError("need at least one chromosome and one locus");
  }

  GenomeAnnotation annotation() const {
    return GenomeAnnotation::uniform(n_chrom, loci_per_chrom);
  }
};

/// Adjacent-locus transition probabilities of the background chain.
struct Transition {
  double up;    // P(0 -> 1)
  double down;  // P(1 -> 0)
};

inline Transition background_transition(double delta, double nu, double d) {
  const double moved = 1.0 - std::exp(-nu * d);
  return {delta * moved, (1.0 - delta) * moved};
}

struct PathwayEvent {
  std::string label;
  std::size_t locus;  // 0-based
};

struct PathwayArrow {
  std::size_t parent;  // index into events
  std::size_t child;
  double p_cond = 0.6;    // P(child | parent occurred)
  double p_spont = 0.05;  // P(child | parent did not occur)
};

struct PathwaySpec {
  std::vector<PathwayEvent> events;
  std::map<std::size_t, double> root_marginals;  // event index -> P(occurs)
  std::vector<PathwayArrow> arrows;
  int max_extent = 30;  // neighbourhood extension drawn from U{0..max_extent}

  /// Events in an order where every parent precedes its children.
  std::vector<std::size_t> topological_order() const {
    const std::size_t k = events.size();
    std::vector<int> parent(k, -1);
    for (const auto& a : arrows) {
      if (a.parent >= k || a.child >= k)
        throw ValidationError("pathway arrow refers to an unknown event");
      if (parent[a.child] >= 0)
        throw ValidationError("pathway event '" + events[a.child].label +
                              "' has two parents; pathways must be forests");
      parent[a.child] = static_cast<int>(a.parent);
    }
    std::vector<std::size_t> order;
    std::vector<int> state(k, 0);
    std::function<void(std::size_t)> visit = [&](std::size_t e) {
      if (state[e] == 2) return;
      if (state[e] == 1) throw ValidationError("pathway contains a cycle");
      state[e] = 1;
      if (parent[e] >= 0) visit(static_cast<std::size_t>(parent[e]));
      state[e] = 2;
      order.push_back(e);
    };
    for (std::size_t e = 0; e < k; ++e) visit(e);
    return order;
  }

  void validate(std::size_t p) const {
    std::set<std::size_t> seen;
    for (const auto& e : events) {
      if (e.locus >= p)
        throw ValidationError("event '" + e.label + "' locus out of range");
      if (!seen.insert(e.locus).second)
        throw ValidationError("two events share locus " +
                              std::to_string(e.locus + 1));
    }
    topological_order();
    std::vector<bool> has_parent(events.size(), false);
    for (const auto& a : arrows) has_parent[a.child] = true;
    for (std::size_t e = 0; e < events.size(); ++e)
      if (!has_parent[e] && !root_marginals.count(e))
        throw ValidationError("root event '" + events[e].label +
                              "' has no marginal probability");
    if (max_extent < 0) throw ValidationError("max_extent must be >= 0");
  }

  /// True conditional-dependence edges: the arrows, at disease loci.
  EdgeSet truth() const {
    EdgeSet e;
    for (const auto& a : arrows)
      e.insert(events[a.parent].locus, events[a.child].locus);
    return e;
  }
};

namespace detail {

inline std::vector<PathwayEvent> default_events(const BackgroundParams& bg) {
  std::vector<PathwayEvent> ev;
  const char* labels = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  for (std::size_t c = 0; c < bg.n_chrom && c < 26; ++c)
    ev.push_back({std::string(1, labels[c]),
                  c * bg.loci_per_chrom + bg.loci_per_chrom / 2 - 1});
  return ev;
}

}  // namespace detail

/// A -> B -> C -> D -> E -> F, one event mid-chromosome on each chromosome.
inline PathwaySpec chain_model(const BackgroundParams& bg = {}) {
  PathwaySpec s;
  s.events = detail::default_events(bg);
  if (s.events.empty()) return s;
  s.root_marginals[0] = 0.5;
  for (std::size_t k = 1; k < s.events.size(); ++k)
    s.arrows.push_back({k - 1, k});
  return s;
}

/// A -> B -> E, A -> C -> F, A -> D.
inline PathwaySpec tree_model(const BackgroundParams& bg = {}) {
  if (bg.n_chrom < 6)
    throw ValidationError("the tree model needs six chromosomes");
  PathwaySpec s;
  s.events = detail::default_events(bg);
  s.events.resize(6);
  s.root_marginals[0] = 0.5;
  enum { A, B, C, D, E, F };
  s.arrows = {{A, B}, {B, E}, {A, C}, {C, F}, {A, D}};
  return s;
}

/// One background vector: an independent stationary Markov chain per
/// chromosome, started from Bernoulli(delta).
template <class Rng>
std::vector<std::uint8_t> gen_background(const BackgroundParams& bg,
                                         Rng& rng) {
  const auto t = background_transition(bg.delta, bg.nu, bg.spacing());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::uint8_t> z(bg.p());
  for (std::size_t c = 0; c < bg.n_chrom; ++c) {
    const std::size_t base = c * bg.loci_per_chrom;
    std::uint8_t state = unif(rng) < bg.delta ? 1 : 0;
    z[base] = state;
    for (std::size_t k = 1; k < bg.loci_per_chrom; ++k) {
      const double u = unif(rng);
      if (state == 0 && u < t.up)
        state = 1;
      else if (state == 1 && u < t.down)
        state = 0;
      z[base + k] = state;
    }
  }
  return z;
}

inline std::vector<std::uint8_t> gen_background(const BackgroundParams& bg,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gen_background(bg, rng);
}

struct PathwayDraw {
  std::vector<std::uint8_t> occurred;  // per event
  std::vector<std::uint8_t> u;         // per locus
};

/// Samples the pathway forest, then marks each occurred event's locus and a
/// random neighbourhood [s - a, s + b] (a, b ~ U{0..max_extent}), clipped to
/// the event's chromosome.
template <class Rng>
PathwayDraw gen_pathway_events(const PathwaySpec& spec,
                               const GenomeAnnotation& ann, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> extent(0, spec.max_extent);
  PathwayDraw out;
  out.occurred.assign(spec.events.size(), 0);
  out.u.assign(ann.size(), 0);

  std::vector<const PathwayArrow*> incoming(spec.events.size(), nullptr);
  for (const auto& a : spec.arrows) incoming[a.child] = &a;
  for (auto e : spec.topological_order()) {
    double prob;
    if (const auto* a = incoming[e])
      prob = out.occurred[a->parent] ? a->p_cond : a->p_spont;
    else
      prob = spec.root_marginals.at(e);
    out.occurred[e] = unif(rng) < prob ? 1 : 0;
  }

  for (std::size_t e = 0; e < spec.events.size(); ++e) {
    if (!out.occurred[e]) continue;
    const std::size_t s = spec.events[e].locus;
    const int left = extent(rng);
    const int right = extent(rng);
    out.u[s] = 1;
    std::size_t t = s;
    for (int k = 0; k < left && t > 0 && ann.same_chromosome(t - 1, s); ++k)
      out.u[--t] = 1;
    t = s;
    for (int k = 0; k < right && t + 1 < ann.size() &&
                    ann.same_chromosome(t + 1, s);
         ++k)
      out.u[++t] = 1;
  }
  return out;
}

template <class Rng>
PathwayDraw gen_pathway_events(const PathwaySpec& spec,
                               const BackgroundParams& bg, Rng& rng) {
  return gen_pathway_events(spec, bg.annotation(), rng);
}

inline PathwayDraw gen_pathway_events(const PathwaySpec& spec,
                                      const BackgroundParams& bg,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gen_pathway_events(spec, bg, rng);
}

/// Independent stream for row `row` of a dataset generated from `seed`.
inline std::mt19937_64 row_stream(std::uint64_t seed, std::uint64_t row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row),
                    static_cast<std::uint32_t>(row >> 32), 0x4c4e4554u};
  return std::mt19937_64(seq);
}

struct Dataset {
  BinaryMatrix x;
  GenomeAnnotation annotation;
  EdgeSet truth;
  /// n x K event indicators (row-major), kept for diagnostics.
  std::vector<std::uint8_t> events;
};

/// n samples of X = Z OR U. Row i depends only on (seed, i).
inline Dataset gen_dataset(const BackgroundParams& bg, const PathwaySpec& spec,
                           std::size_t n, std::uint64_t seed) {
  bg.validate();
  if (n < 1) throw ValidationError("n must be >= 1");
  spec.validate(bg.p());
  Dataset out;
  out.annotation = bg.annotation();
  out.truth = spec.truth();
  out.x = BinaryMatrix(n, bg.p());
  out.events.reserve(n * spec.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = row_stream(seed, i);
    const auto z = gen_background(bg, rng);
    const auto draw = gen_pathway_events(spec, out.annotation, rng);
    for (std::size_t j = 0; j < bg.p(); ++j)
      out.x.set(i, j, (z[j] | draw.u[j]) ? 1 : 0);
    out.events.insert(out.events.end(), draw.occurred.begin(),
                      draw.occurred.end());
  }
  return out;
}

}  // namespace logitnet::sim
