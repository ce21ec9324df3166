#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace logitnet {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse_error"; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation_error"; }
};

/// Raised when a routine that needs complete data sees a missing cell.
class MissingDataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "missing_data"; }
};

// ---------------------------------------------------------------------------
// Packed symmetric storage
// ---------------------------------------------------------------------------

/// Symmetric p x p matrix storing each unordered pair once, so that
/// (r, s) and (s, r) always read the same value.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  SymmetricMatrix(std::size_t p, double fill)
      : p_(p), data_(p * (p + 1) / 2, fill) {}

  std::size_t size() const { return p_; }

  double operator()(std::size_t r, std::size_t s) const {
    return data_[offset(r, s)];
  }
  double& operator()(std::size_t r, std::size_t s) {
    return data_[offset(r, s)];
  }

  const std::vector<double>& packed() const { return data_; }
  std::vector<double>& packed() { return data_; }

  bool operator==(const SymmetricMatrix&) const = default;

 private:
  std::size_t offset(std::size_t r, std::size_t s) const {
    if (r > s) std::swap(r, s);
    // row r of the upper triangle starts after r rows of lengths p, p-1, ...
    return r * p_ - (r * (r - 1)) / 2 + (s - r);
  }

  std::size_t p_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// n x p matrix of binary observations. Values are stored column-major; the
/// missing mask is kept apart from the values so that a missing cell is
/// never mistaken for a 0.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;

  BinaryMatrix(std::size_t n, std::size_t p)
      : n_(n), p_(p), values_(n * p, 0), missing_(n * p, 0) {
    for (std::size_t i = 0; i < n; ++i)
      sample_ids_.push_back("s" + std::to_string(i + 1));
    for (std::size_t j = 0; j < p; ++j)
      locus_ids_.push_back("L" + std::to_string(j + 1));
    validate();
  }

  BinaryMatrix(std::size_t n, std::size_t p,
               std::vector<std::string> sample_ids,
               std::vector<std::string> locus_ids)
      : n_(n),
        p_(p),
        values_(n * p, 0),
        missing_(n * p, 0),
        sample_ids_(std::move(sample_ids)),
        locus_ids_(std::move(locus_ids)) {
    validate();
  }

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }

  std::uint8_t operator()(std::size_t i, std::size_t j) const {
    return values_[j * n_ + i];
  }

  void set(std::size_t i, std::size_t j, int v) {
    if (v != 0 && v != 1)
      throw ValidationError("binary cell (" + std::to_string(i + 1) + ", " +
                            std::to_string(j + 1) + ") must be 0 or 1");
    values_[j * n_ + i] = static_cast<std::uint8_t>(v);
    missing_[j * n_ + i] = 0;
  }

  void set_missing(std::size_t i, std::size_t j) {
    values_[j * n_ + i] = 0;
    missing_[j * n_ + i] = 1;
  }

  bool is_missing(std::size_t i, std::size_t j) const {
    return missing_[j * n_ + i] != 0;
  }

  bool has_missing() const {
    return std::any_of(missing_.begin(), missing_.end(),
                       [](std::uint8_t m) { return m != 0; });
  }

  std::size_t missing_count() const {
    return static_cast<std::size_t>(
        std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
  }

  /// Column j as a contiguous span of n values (missing cells read as 0).
  const std::uint8_t* column(std::size_t j) const {
    return values_.data() + j * n_;
  }

  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::string>& locus_ids() const { return locus_ids_; }

  /// Sub-matrix made of the given rows, in the given order.
  BinaryMatrix select_rows(const std::vector<std::size_t>& rows) const {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (auto i : rows) ids.push_back(sample_ids_.at(i));
    BinaryMatrix out(rows.size(), p_, std::move(ids), locus_ids_);
    for (std::size_t j = 0; j < p_; ++j)
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (is_missing(rows[k], j))
          out.set_missing(k, j);
        else
          out.set(k, j, (*this)(rows[k], j));
      }
    return out;
  }

  void validate() const {
    if (n_ < 1) throw ValidationError("binary matrix needs at least one row");
    if (p_ < 2) throw ValidationError("binary matrix needs at least two loci");
    if (sample_ids_.size() != n_)
      throw ValidationError("sample id count does not match row count");
    if (locus_ids_.size() != p_)
      throw ValidationError("locus id count does not match column count");
  }

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<std::uint8_t> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> locus_ids_;
};

inline void require_complete(const BinaryMatrix& x, const char* who) {
  if (x.has_missing())
    throw MissingDataError(std::string(who) +
                           ": data has missing entries; run imputation first");
}

/// Chromosome label and within-chromosome order for every locus.
struct GenomeAnnotation {
  std::vector<std::string> locus_ids;
  std::vector<int> chromosome;
  std::vector<int> position_index;

  std::size_t size() const { return chromosome.size(); }

  bool same_chromosome(std::size_t r, std::size_t s) const {
    return chromosome[r] == chromosome[s];
  }

  /// Loci grouped by chromosome (in order of first appearance), each group
  /// sorted by position.
  std::vector<std::vector<std::size_t>> chromosomes() const {
    std::vector<int> labels;
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t j = 0; j < chromosome.size(); ++j) {
      if (!groups.count(chromosome[j])) labels.push_back(chromosome[j]);
      groups[chromosome[j]].push_back(j);
    }
    std::vector<std::vector<std::size_t>> out;
    for (int c : labels) {
      auto g = groups[c];
      std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
        return position_index[a] < position_index[b];
      });
      out.push_back(std::move(g));
    }
    return out;
  }

  void validate(std::size_t p) const {
    if (chromosome.size() != p || position_index.size() != p)
      throw ValidationError("annotation length " +
                            std::to_string(chromosome.size()) +
                            " does not match p = " + std::to_string(p));
    if (!locus_ids.empty() && locus_ids.size() != p)
      throw ValidationError("annotation locus id count does not match p");
    std::map<int, int> last;
    for (std::size_t j = 0; j < p; ++j) {
      auto it = last.find(chromosome[j]);
      if (it != last.end() && position_index[j] <= it->second)
        throw ValidationError("position_index must increase within chromosome " +
                              std::to_string(chromosome[j]) + " (locus " +
                              std::to_string(j + 1) + ")");
      last[chromosome[j]] = position_index[j];
    }
  }

  /// `n_chrom` chromosomes of `loci_per_chrom` consecutive loci each.
  static GenomeAnnotation uniform(std::size_t n_chrom,
                                  std::size_t loci_per_chrom) {
    GenomeAnnotation a;
    for (std::size_t c = 0; c < n_chrom; ++c)
      for (std::size_t k = 0; k < loci_per_chrom; ++k) {
        a.locus_ids.push_back("L" + std::to_string(c * loci_per_chrom + k + 1));
        a.chromosome.push_back(static_cast<int>(c + 1));
        a.position_index.push_back(static_cast<int>(k + 1));
      }
    return a;
  }
};

/// Symmetric coefficient matrix: diagonal entries are intercepts, the
/// off-diagonal (r, s) entry is the shared interaction coefficient.
using CoefMatrix = SymmetricMatrix;

/// Symmetric matrix of penalty multipliers, all >= 1.
struct WeightMatrix {
  SymmetricMatrix w;

  WeightMatrix() = default;
  explicit WeightMatrix(std::size_t p) : w(p, 1.0) {}

  std::size_t size() const { return w.size(); }
  double operator()(std::size_t r, std::size_t s) const { return w(r, s); }
  double& operator()(std::size_t r, std::size_t s) { return w(r, s); }

  double max_off_diagonal() const {
    double m = 1.0;
    for (std::size_t r = 0; r < size(); ++r)
      for (std::size_t s = r + 1; s < size(); ++s) m = std::max(m, w(r, s));
    return m;
  }

  void validate(std::size_t p) const {
    if (size() != p)
      throw ValidationError("weight matrix dimension does not match p");
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t s = r + 1; s < p; ++s)
        if (!(w(r, s) >= 1.0) || !std::isfinite(w(r, s)))
          throw ValidationError("weight (" + std::to_string(r + 1) + ", " +
                                std::to_string(s + 1) + ") must be >= 1");
  }

  void validate(const GenomeAnnotation& ann) const {
    validate(ann.size());
    for (std::size_t r = 0; r < size(); ++r)
      for (std::size_t s = r + 1; s < size(); ++s)
        if (!ann.same_chromosome(r, s) && w(r, s) != 1.0)
          throw ValidationError("cross-chromosome weight must be 1");
  }
};

/// Unordered locus pair, stored with first < second (0-based).
using Edge = std::pair<std::size_t, std::size_t>;

inline Edge make_edge(std::size_t r, std::size_t s) {
  if (r == s) throw ValidationError("self-pair is not an edge");
  return r < s ? Edge{r, s} : Edge{s, r};
}

struct EdgeSet {
  std::set<Edge> edges;
  std::map<Edge, int> votes;

  std::size_t size() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
  bool contains(std::size_t r, std::size_t s) const {
    return r != s && edges.count(make_edge(r, s)) > 0;
  }
  void insert(std::size_t r, std::size_t s) { edges.insert(make_edge(r, s)); }

  void validate(std::size_t p) const {
    for (const auto& [r, s] : edges)
      if (r >= s || s >= p)
        throw ValidationError("edge index out of range");
  }

  bool operator==(const EdgeSet& o) const { return edges == o.edges; }
};

/// Edges are the off-diagonal entries with |beta| > tol.
inline EdgeSet coef_to_edges(const CoefMatrix& b, double tol = 0.0) {
  EdgeSet out;
  for (std::size_t r = 0; r < b.size(); ++r)
    for (std::size_t s = r + 1; s < b.size(); ++s)
      if (std::abs(b(r, s)) > tol) out.edges.emplace(r, s);
  return out;
}

inline std::size_t count_off_diagonal_nonzeros(const CoefMatrix& b) {
  return coef_to_edges(b).size();
}

}  // namespace logitnet
