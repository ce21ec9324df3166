#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "logitnet/core.hpp"

namespace logitnet::io {

struct CsvSpec {
  char delimiter = ',';
  std::string missing_token = "NA";
};

namespace detail {

inline std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

inline long parse_int(const std::string& s, const std::string& where) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(where + ": expected an integer, got '" + s + "'");
  return v;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": expected a number, got '" + s + "'");
  }
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Binary matrix CSV
// ---------------------------------------------------------------------------

/// Reads a header row of locus ids followed by one sample per row. A leading
/// `sample_id` header column carries sample names.
inline BinaryMatrix read_binary_matrix(std::istream& in,
                                       const CsvSpec& spec = {}) {
  std::string line;
  if (!detail::next_data_line(in, line)) throw ParseError("empty matrix file");
  auto header = detail::split(line, spec.delimiter);
  const bool has_ids = !header.empty() && header.front() == "sample_id";
  std::vector<std::string> loci(header.begin() + (has_ids ? 1 : 0),
                                header.end());
  const std::size_t p = loci.size();

  std::vector<std::string> sample_ids;
  std::vector<std::vector<int>> cells;  // -1 == missing
  std::size_t row = 0;
  while (detail::next_data_line(in, line)) {
    ++row;
    auto fields = detail::split(line, spec.delimiter);
    if (fields.size() != p + (has_ids ? 1 : 0))
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(p) + " cells, found " +
                       std::to_string(fields.size() - (has_ids ? 1 : 0)));
    sample_ids.push_back(has_ids ? fields[0] : "s" + std::to_string(row));
    std::vector<int> r(p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto& f = fields[j + (has_ids ? 1 : 0)];
      if (f == spec.missing_token)
        r[j] = -1;
      else if (f == "0")
        r[j] = 0;
      else if (f == "1")
        r[j] = 1;
      else
        throw ParseError("row " + std::to_string(row) + ", column " +
                         std::to_string(j + 1) + ": invalid cell '" + f + "'");
    }
    cells.push_back(std::move(r));
  }
  BinaryMatrix x(cells.size(), p, std::move(sample_ids), std::move(loci));
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      if (cells[i][j] < 0)
        x.set_missing(i, j);
      else
        x.set(i, j, cells[i][j]);
    }
  return x;
}

inline BinaryMatrix load_binary_matrix(const std::string& path,
                                       const CsvSpec& spec = {}) {
  auto in = detail::open_in(path);
  return read_binary_matrix(in, spec);
}

inline void write_binary_matrix(std::ostream& out, const BinaryMatrix& x,
                                const CsvSpec& spec = {}) {
  out << "sample_id";
  for (const auto& id : x.locus_ids()) out << spec.delimiter << id;
  out << '\n';
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out << x.sample_ids()[i];
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out << spec.delimiter;
      if (x.is_missing(i, j))
        out << spec.missing_token;
      else
        out << int(x(i, j));
    }
    out << '\n';
  }
}

inline void save_binary_matrix(const std::string& path, const BinaryMatrix& x,
                               const CsvSpec& spec = {}) {
  auto out = detail::open_out(path);
  write_binary_matrix(out, x, spec);
}

// ---------------------------------------------------------------------------
// Annotation TSV: locus_id, chromosome, position_index
// ---------------------------------------------------------------------------

inline GenomeAnnotation read_annotation(std::istream& in) {
  std::string line;
  if (!detail::next_data_line(in, line))
    throw ParseError("empty annotation file");
  auto header = detail::split(line, '\t');
  if (header.size() != 3 || header[0] != "locus_id" ||
      header[1] != "chromosome" || header[2] != "position_index")
    throw ParseError(
        "annotation header must be locus_id<TAB>chromosome<TAB>position_index");
  GenomeAnnotation a;
  std::size_t row = 0;
  while (detail::next_data_line(in, line)) {
    ++row;
    auto f = detail::split(line, '\t');
    const std::string where = "annotation row " + std::to_string(row);
    if (f.size() != 3) throw ParseError(where + ": expected 3 fields");
    a.locus_ids.push_back(f[0]);
    a.chromosome.push_back(static_cast<int>(detail::parse_int(f[1], where)));
    a.position_index.push_back(
        static_cast<int>(detail::parse_int(f[2], where)));
  }
  return a;
}

inline GenomeAnnotation load_annotation(const std::string& path) {
  auto in = detail::open_in(path);
  return read_annotation(in);
}

inline void write_annotation(std::ostream& out, const GenomeAnnotation& a) {
  out << "locus_id\tchromosome\tposition_index\n";
  for (std::size_t j = 0; j < a.size(); ++j)
    out << (a.locus_ids.empty() ? "L" + std::to_string(j + 1) : a.locus_ids[j])
        << '\t' << a.chromosome[j] << '\t' << a.position_index[j] << '\n';
}

inline void save_annotation(const std::string& path,
                            const GenomeAnnotation& a) {
  auto out = detail::open_out(path);
  write_annotation(out, a);
}

/// Load and cross-check an annotation against the matrix it describes.
inline GenomeAnnotation load_annotation_for(const std::string& path,
                                           const BinaryMatrix& x) {
  auto a = load_annotation(path);
  a.validate(x.cols());
  for (std::size_t j = 0; j < a.locus_ids.size(); ++j)
    if (a.locus_ids[j] != x.locus_ids()[j])
      throw ValidationError("annotation locus '" + a.locus_ids[j] +
                            "' does not match matrix column '" +
                            x.locus_ids()[j] + "'");
  return a;
}

// ---------------------------------------------------------------------------
// Coefficient triplets: r,s,beta with r <= s, 1-based
// ---------------------------------------------------------------------------

/// Writes every intercept and every nonzero interaction.
inline void write_coef_triplets(std::ostream& out, const CoefMatrix& b) {
  out << "r,s,beta\n";
  for (std::size_t r = 0; r < b.size(); ++r)
    for (std::size_t s = r; s < b.size(); ++s)
      if (r == s || b(r, s) != 0.0)
        out << r + 1 << ',' << s + 1 << ',' << detail::format_double(b(r, s))
            << '\n';
}

inline void save_coef_triplets(const std::string& path, const CoefMatrix& b) {
  auto out = detail::open_out(path);
  write_coef_triplets(out, b);
}

inline CoefMatrix read_coef_triplets(std::istream& in, std::size_t p) {
  std::string line;
  if (!detail::next_data_line(in, line))
    throw ParseError("empty coefficient file");
  CoefMatrix b(p, 0.0);
  std::size_t row = 0;
  while (detail::next_data_line(in, line)) {
    ++row;
    auto f = detail::split(line, ',');
    const std::string where = "coefficient row " + std::to_string(row);
    if (f.size() != 3) throw ParseError(where + ": expected r,s,beta");
    auto r = detail::parse_int(f[0], where);
    auto s = detail::parse_int(f[1], where);
    if (r < 1 || s < 1 || static_cast<std::size_t>(r) > p ||
        static_cast<std::size_t>(s) > p)
      throw ValidationError(where + ": index out of range");
    b(r - 1, s - 1) = detail::parse_double(f[2], where);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Edge lists: r<TAB>s[<TAB>votes], 1-based
// ---------------------------------------------------------------------------

inline void write_edges(std::ostream& out, const EdgeSet& e) {
  const bool with_votes = !e.votes.empty();
  out << "r\ts" << (with_votes ? "\tvotes" : "") << '\n';
  for (const auto& edge : e.edges) {
    out << edge.first + 1 << '\t' << edge.second + 1;
    if (with_votes) {
      auto it = e.votes.find(edge);
      out << '\t' << (it == e.votes.end() ? 0 : it->second);
    }
    out << '\n';
  }
}

inline void save_edges(const std::string& path, const EdgeSet& e) {
  auto out = detail::open_out(path);
  write_edges(out, e);
}

inline EdgeSet read_edges(std::istream& in) {
  std::string line;
  EdgeSet e;
  if (!detail::next_data_line(in, line)) return e;
  auto header = detail::split(line, '\t');
  if (header.size() < 2 || header[0] != "r" || header[1] != "s")
    throw ParseError("edge list header must start with r<TAB>s");
  const bool with_votes = header.size() >= 3;
  std::size_t row = 0;
  while (detail::next_data_line(in, line)) {
    ++row;
    auto f = detail::split(line, '\t');
    const std::string where = "edge row " + std::to_string(row);
    if (f.size() < 2) throw ParseError(where + ": expected r<TAB>s");
    auto r = detail::parse_int(f[0], where);
    auto s = detail::parse_int(f[1], where);
    if (r < 1 || s < 1) throw ValidationError(where + ": indices are 1-based");
    auto edge = make_edge(r - 1, s - 1);
    e.edges.insert(edge);
    if (with_votes && f.size() >= 3)
      e.votes[edge] = static_cast<int>(detail::parse_int(f[2], where));
  }
  return e;
}

inline EdgeSet load_edges(const std::string& path) {
  auto in = detail::open_in(path);
  return read_edges(in);
}

// ---------------------------------------------------------------------------
// Weight matrices
// ---------------------------------------------------------------------------

/// Sparse triplets r,s,w (1-based, r < s) for every entry that is not 1.
inline void write_weights_sparse(std::ostream& out, const WeightMatrix& w) {
  out << "r,s,w\n";
  for (std::size_t r = 0; r < w.size(); ++r)
    for (std::size_t s = r + 1; s < w.size(); ++s)
      if (w(r, s) != 1.0)
        out << r + 1 << ',' << s + 1 << ',' << detail::format_double(w(r, s))
            << '\n';
}

inline void write_weights_dense(std::ostream& out, const WeightMatrix& w) {
  for (std::size_t r = 0; r < w.size(); ++r) {
    for (std::size_t s = 0; s < w.size(); ++s)
      out << (s ? "," : "") << detail::format_double(w(r, s));
    out << '\n';
  }
}

/// Accepts either format: a header `r,s,w` marks triplets, otherwise the
/// file is read as a dense p x p matrix.
inline WeightMatrix read_weights(std::istream& in, std::size_t p) {
  WeightMatrix w(p);
  std::string line;
  if (!detail::next_data_line(in, line)) return w;
  auto first = detail::split(line, ',');
  if (first.size() == 3 && first[0] == "r") {
    std::size_t row = 0;
    while (detail::next_data_line(in, line)) {
      ++row;
      auto f = detail::split(line, ',');
      const std::string where = "weight row " + std::to_string(row);
      if (f.size() != 3) throw ParseError(where + ": expected r,s,w");
      auto r = detail::parse_int(f[0], where);
      auto s = detail::parse_int(f[1], where);
      if (r < 1 || s < 1 || static_cast<std::size_t>(std::max(r, s)) > p)
        throw ValidationError(where + ": index out of range");
      w(r - 1, s - 1) = detail::parse_double(f[2], where);
    }
  } else {
    std::size_t r = 0;
    do {
      auto f = detail::split(line, ',');
      if (f.size() != p || r >= p)
        throw ParseError("dense weight matrix must be " + std::to_string(p) +
                         " x " + std::to_string(p));
      for (std::size_t s = r; s < p; ++s)
        w(r, s) = detail::parse_double(
            f[s], "weight row " + std::to_string(r + 1));
      ++r;
    } while (detail::next_data_line(in, line));
    if (r != p) throw ParseError("dense weight matrix has too few rows");
  }
  w.validate(p);
  return w;
}

inline WeightMatrix load_weights(const std::string& path, std::size_t p) {
  auto in = detail::open_in(path);
  return read_weights(in, p);
}

}  // namespace logitnet::io
