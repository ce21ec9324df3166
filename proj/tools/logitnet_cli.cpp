// logitnet command-line driver.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "logitnet/logitnet.hpp"

namespace {

using logitnet::BinaryMatrix;
using logitnet::CoefMatrix;
using logitnet::EdgeSet;
using logitnet::GenomeAnnotation;
using logitnet::SolverConfig;
using logitnet::WeightMatrix;
using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kInput = 3 };

// ---------------------------------------------------------------------------
// JSON config files: top-level keys are global flags or flags of the chosen
// subcommand; an object keyed by a subcommand name scopes its flags.
// ---------------------------------------------------------------------------

class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::string active;
    for (const auto* sub : app_->get_subcommands()) active = sub->get_name();
    std::vector<CLI::ConfigItem> items;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        for (auto jt = it->begin(); jt != it->end(); ++jt)
          items.push_back(item({it.key()}, jt.key(), *jt));
        continue;
      }
      std::vector<std::string> parents;
      if (!active.empty() && !is_global(it.key())) parents = {active};
      items.push_back(item(parents, it.key(), *it));
    }
    return items;
  }

 private:
  bool is_global(const std::string& name) const {
    for (const auto* opt : app_->get_options())
      if (opt->check_lname(name)) return true;
    return false;
  }

  static std::string scalar(const Json& v, const std::string& name) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config value for '" + name + "' must be a scalar");
  }

  static CLI::ConfigItem item(std::vector<std::string> parents,
                              const std::string& name, const Json& v) {
    CLI::ConfigItem c;
    c.parents = std::move(parents);
    c.name = name;
    if (v.is_array()) {
      for (const auto& e : v) c.inputs.push_back(scalar(e, name));
    } else {
      c.inputs.push_back(scalar(v, name));
    }
    return c;
  }

  const CLI::App* app_;
};

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string fnv1a64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw logitnet::Error("cannot open '" + path + "' for reading");
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

struct Run {
  std::string command;
  std::vector<std::string> argv;
  Json inputs = Json::object();
  Json outputs = Json::array();
  Json seeds = Json::object();
  Json warnings = Json::array();

  void input(const std::string& role, const std::string& path) {
    inputs[role] = {{"path", path}, {"fnv1a64", fnv1a64(path)}};
  }
  void output(const std::string& path) { outputs.push_back(path); }
  void warn(const std::string& w) {
    warnings.push_back(w);
    std::cerr << "warning: " << w << '\n';
  }
  void warn_all(const std::vector<std::string>& ws) {
    for (const auto& w : ws) warn(w);
  }

  Json manifest(const CLI::App& sub, const CLI::App& app) const {
    Json options = Json::object();
    auto collect = [&](const CLI::App& a) {
      for (const auto* opt : a.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help")
          continue;
        const auto& name = opt->get_lnames().front();
        const auto& res = opt->results();
        if (!res.empty())
          options[name] = res.size() == 1 ? Json(res.front()) : Json(res);
        else if (!opt->get_default_str().empty())
          options[name] = opt->get_default_str();
      }
    };
    collect(app);
    collect(sub);
    Json m;
    m["tool"] = "logitnet";
    m["version"] = kVersion;
    m["command"] = command;
    m["argv"] = argv;
    m["options"] = options;
    m["seeds"] = seeds;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["warnings"] = warnings;
    m["build"] = {{"compiler", __VERSION__}, {"cplusplus", __cplusplus}};
    return m;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw logitnet::Error("cannot open '" + path + "' for writing");
  out << text;
}

void write_json(const std::string& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared argument groups
// ---------------------------------------------------------------------------

struct DataArgs {
  std::string data, annotation, missing_token = "NA";

  void add(CLI::App* sub, bool need_annotation) {
    sub->add_option("--data", data, "Binary matrix CSV (header of locus ids)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* a = sub->add_option("--annotation", annotation,
                              "Annotation TSV: locus_id, chromosome, position_index")
                  ->check(CLI::ExistingFile);
    if (need_annotation) a->required();
    sub->add_option("--missing-token", missing_token, "Token marking a missing cell")
        ->capture_default_str();
  }

  BinaryMatrix load(Run& run) const {
    run.input("data", data);
    return logitnet::io::load_binary_matrix(data, {',', missing_token});
  }

  GenomeAnnotation load_annotation(Run& run, const BinaryMatrix& x) const {
    run.input("annotation", annotation);
    return logitnet::io::load_annotation_for(annotation, x);
  }
};

struct SolverArgs {
  SolverConfig cfg;

  void add(CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "Convergence threshold on coefficient change")
        ->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "Full-sweep cap")->capture_default_str();
    sub->add_option("--step-cap", cfg.step_cap, "Trust-region bound per update")
        ->capture_default_str();
    sub->add_option("--curvature-floor", cfg.curvature_floor,
                    "Lower bound on the second derivative")
        ->capture_default_str();
  }
};

struct WeightArgs {
  std::string source = "auto";

  void add(CLI::App* sub) {
    sub->add_option("--weights", source,
                    "Penalty weights: auto (estimate from data), none, or a file")
        ->capture_default_str();
  }

  WeightMatrix resolve(Run& run, const DataArgs& d, const BinaryMatrix& x,
                       int jobs) const {
    if (source == "none") return WeightMatrix(x.cols());
    if (source == "auto") {
      if (d.annotation.empty())
        throw logitnet::ValidationError("--weights auto needs --annotation");
      const auto ann = d.load_annotation(run, x);
      auto wr = logitnet::weights::compute_weights(x, ann, jobs);
      run.warn_all(wr.warnings);
      return wr.w;
    }
    run.input("weights", source);
    return logitnet::io::load_weights(source, x.cols());
  }
};

struct GridArgs {
  int size = 50;
  double ratio = 0.01;

  void add(CLI::App* sub, const std::string& flag) {
    sub->add_option(flag, size, "Number of log-spaced lambdas from lambda_max")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--lambda-ratio", ratio, "Smallest lambda as a fraction of lambda_max")
        ->capture_default_str();
  }
};

Json edges_json(const EdgeSet& e) {
  Json a = Json::array();
  for (const auto& [r, s] : e.edges) {
    Json item = {{"r", r + 1}, {"s", s + 1}};
    if (auto it = e.votes.find({r, s}); it != e.votes.end()) item["votes"] = it->second;
    a.push_back(item);
  }
  return a;
}

Json fit_json(const logitnet::FitResult& f) {
  return {{"lambda", f.lambda},
          {"converged", f.converged},
          {"sweeps", f.sweeps},
          {"edges", logitnet::count_off_diagonal_nonzeros(f.B)},
          {"penalized_loss", f.penalized_loss},
          {"loglik", f.loglik},
          {"boundary", f.boundary},
          {"degenerate_columns", f.degenerate_columns},
          {"warnings", f.warnings}};
}

// ---------------------------------------------------------------------------
// Estimate files read by `evaluate`
// ---------------------------------------------------------------------------

struct Estimate {
  std::vector<double> lambda;  // NaN for a single unlabelled estimate
  std::vector<EdgeSet> edges;
};

/// Accepts an edge list (r<TAB>s...), a coefficient triplet file (r,s,beta)
/// or a path file (lambda_index,lambda,r,s,beta). Triplets listing both
/// (r,s) and (s,r) are asymmetric and reconciled with `rule`.
Estimate load_estimate(const std::string& path, logitnet::Rule rule) {
  std::ifstream in(path);
  if (!in) throw logitnet::Error("cannot open '" + path + "' for reading");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  Estimate est;
  if (header.rfind("r\ts", 0) == 0) {
    std::ifstream again(path);
    est.lambda.push_back(std::numeric_limits<double>::quiet_NaN());
    est.edges.push_back(logitnet::io::read_edges(again));
    return est;
  }
  const bool path_file = header == "lambda_index,lambda,r,s,beta";
  if (!path_file && header != "r,s,beta")
    throw logitnet::ParseError("'" + path + "': unrecognised estimate header");

  std::vector<std::map<logitnet::Edge, int>> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    const std::string where = "'" + path + "' row " + std::to_string(row);
    if (f.size() != (path_file ? 5u : 3u)) throw logitnet::ParseError(where + ": wrong field count");
    std::size_t k = 0;
    double lam = std::numeric_limits<double>::quiet_NaN();
    std::size_t off = 0;
    namespace d = logitnet::io::detail;
    if (path_file) {
      const long idx = d::parse_int(f[0], where);
      if (idx < 0) throw logitnet::ValidationError(where + ": negative lambda_index");
      k = static_cast<std::size_t>(idx);
      lam = d::parse_double(f[1], where);
      off = 2;
    }
    const long r = d::parse_int(f[off], where), s = d::parse_int(f[off + 1], where);
    const double beta = d::parse_double(f[off + 2], where);
    if (r < 1 || s < 1) throw logitnet::ValidationError(where + ": indices are 1-based");
    if (k >= seen.size()) {
      seen.resize(k + 1);
      est.lambda.resize(k + 1, std::numeric_limits<double>::quiet_NaN());
    }
    est.lambda[k] = lam;
    if (r == s || beta == 0.0) continue;
    seen[k][logitnet::make_edge(r - 1, s - 1)] |= (r < s ? 1 : 2);
  }
  if (seen.empty()) {
    seen.resize(1);
    est.lambda.assign(1, std::numeric_limits<double>::quiet_NaN());
  }
  bool asymmetric = false;
  for (const auto& m : seen)
    for (const auto& [e, bits] : m)
      if (bits & 2) asymmetric = true;
  for (const auto& m : seen) {
    EdgeSet e;
    for (const auto& [edge, bits] : m)
      if (!asymmetric || rule == logitnet::Rule::Or || bits == 3)
        e.insert(edge.first, edge.second);
    est.edges.push_back(std::move(e));
  }
  return est;
}

// ---------------------------------------------------------------------------
// Oracle JSON
// ---------------------------------------------------------------------------

logitnet::oracle::QuadExpModel model_from_json(const Json& j) {
  if (!j.contains("theta") || !j.contains("kappa"))
    throw logitnet::ValidationError("model needs 'theta' and 'kappa'");
  const auto theta = j.at("theta").get<std::vector<double>>();
  logitnet::oracle::QuadExpModel m(theta.size());
  m.theta = theta;
  const auto& k = j.at("kappa");
  if (k.size() != theta.size())
    throw logitnet::ValidationError("kappa must be p x p");
  for (std::size_t r = 0; r < theta.size(); ++r) {
    if (k[r].size() != theta.size())
      throw logitnet::ValidationError("kappa must be p x p");
    for (std::size_t s = r + 1; s < theta.size(); ++s) m.kappa(r, s) = k[r][s].get<double>();
  }
  return m;
}

Json model_to_json(const logitnet::oracle::QuadExpModel& m) {
  Json kappa = Json::array();
  for (std::size_t r = 0; r < m.p(); ++r) {
    Json row = Json::array();
    for (std::size_t s = 0; s < m.p(); ++s) row.push_back(r == s ? 0.0 : m.kappa(r, s));
    kappa.push_back(row);
  }
  return {{"theta", m.theta}, {"kappa", kappa}};
}

BinaryMatrix matrix_from_json(const Json& rows) {
  if (!rows.is_array() || rows.empty())
    throw logitnet::ValidationError("'data' must be a nonempty array of rows");
  const std::size_t p = rows.front().size();
  BinaryMatrix x(rows.size(), p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != p) throw logitnet::ValidationError("ragged 'data' rows");
    for (std::size_t j = 0; j < p; ++j) {
      const int v = rows[i][j].get<int>();
      if (v != 0 && v != 1) throw logitnet::ValidationError("'data' entries must be 0/1");
      x.set(i, j, v);
    }
  }
  return x;
}

std::size_t index_from_json(const Json& j, const char* key, std::size_t p) {
  if (!j.contains(key)) throw logitnet::ValidationError(std::string("missing '") + key + "'");
  const long v = j.at(key).get<long>();
  if (v < 1 || static_cast<std::size_t>(v) > p)
    throw logitnet::ValidationError(std::string("'") + key + "' out of range (1-based)");
  return static_cast<std::size_t>(v - 1);
}

Json run_oracle(const std::string& op, const Json& in) {
  namespace oc = logitnet::oracle;
  if (op == "joint_probability") {
    const auto m = model_from_json(in.at("model"));
    const auto x = in.at("x").get<std::vector<int>>();
    return {{"op", op}, {"probability", oc::joint_probability(m, x)}};
  }
  if (op == "conditional_log_odds_ratio") {
    const auto m = model_from_json(in.at("model"));
    const auto cond = in.at("cond").get<std::vector<int>>();
    const auto r = index_from_json(in, "r", m.p()), s = index_from_json(in, "s", m.p());
    return {{"op", op}, {"log_odds_ratio", oc::conditional_log_odds_ratio(m, r, s, cond)}};
  }
  if (op == "exact_mle") {
    const auto x = in.contains("data_path")
                       ? logitnet::io::load_binary_matrix(in.at("data_path").get<std::string>())
                       : matrix_from_json(in.at("data"));
    const auto res = oc::exact_mle(x);
    Json out = {{"op", op}, {"model", model_to_json(res.model)}};
    out["converged"] = res.converged;
    out["boundary"] = res.boundary;
    out["iterations"] = res.iterations;
    out["gradient_max_norm"] = res.gradient_max_norm;
    out["loglik"] = res.loglik;
    return out;
  }
  throw logitnet::ValidationError(
      "unknown oracle op '" + op +
      "' (expected joint_probability|conditional_log_odds_ratio|exact_mle)");
}

// ---------------------------------------------------------------------------
// Simulation specs
// ---------------------------------------------------------------------------

logitnet::sim::PathwaySpec spec_from_json(const Json& j, std::size_t p) {
  logitnet::sim::PathwaySpec s;
  std::map<std::string, std::size_t> by_label;
  for (const auto& e : j.at("events")) {
    const auto label = e.at("label").get<std::string>();
    const long locus = e.at("locus").get<long>();
    if (locus < 1 || static_cast<std::size_t>(locus) > p)
      throw logitnet::ValidationError("event '" + label + "' locus out of range (1-based)");
    if (!by_label.emplace(label, s.events.size()).second)
      throw logitnet::ValidationError("duplicate event label '" + label + "'");
    s.events.push_back({label, static_cast<std::size_t>(locus - 1)});
  }
  auto lookup = [&](const std::string& label) {
    auto it = by_label.find(label);
    if (it == by_label.end()) throw logitnet::ValidationError("unknown event '" + label + "'");
    return it->second;
  };
  if (j.contains("roots"))
    for (auto it = j.at("roots").begin(); it != j.at("roots").end(); ++it)
      s.root_marginals[lookup(it.key())] = it->get<double>();
  if (j.contains("arrows"))
    for (const auto& a : j.at("arrows")) {
      logitnet::sim::PathwayArrow arrow{lookup(a.at("parent").get<std::string>()),
                                        lookup(a.at("child").get<std::string>())};
      arrow.p_cond = a.value("p_cond", arrow.p_cond);
      arrow.p_spont = a.value("p_spont", arrow.p_spont);
      s.arrows.push_back(arrow);
    }
  s.max_extent = j.value("max_extent", s.max_extent);
  s.validate(p);
  return s;
}

logitnet::sim::PathwaySpec resolve_model(const std::string& model,
                                         const logitnet::sim::BackgroundParams& bg,
                                         Run& run) {
  if (model == "chain") return logitnet::sim::chain_model(bg);
  if (model == "tree") return logitnet::sim::tree_model(bg);
  std::ifstream in(model);
  if (!in)
    throw logitnet::ValidationError("--model must be chain, tree or a spec JSON file");
  run.input("model", model);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw logitnet::ParseError("'" + model + "': " + e.what());
  }
  return spec_from_json(j, bg.p());
}

// ---------------------------------------------------------------------------
// Path output
// ---------------------------------------------------------------------------

void write_symmetric_path(const std::string& path,
                          const std::vector<logitnet::FitResult>& fits) {
  std::ofstream out(path);
  if (!out) throw logitnet::Error("cannot open '" + path + "' for writing");
  out << "lambda_index,lambda,r,s,beta\n";
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (fits[k].skipped) continue;
    const auto& b = fits[k].B;
    for (std::size_t r = 0; r < b.size(); ++r)
      for (std::size_t s = r; s < b.size(); ++s)
        if (r == s || b(r, s) != 0.0)
          out << k << ',' << logitnet::io::detail::format_double(fits[k].lambda) << ','
              << r + 1 << ',' << s + 1 << ','
              << logitnet::io::detail::format_double(b(r, s)) << '\n';
  }
}

void write_asymmetric(std::ostream& out, const logitnet::AsymmetricMatrix& b,
                      const std::string& prefix) {
  for (std::size_t r = 0; r < b.size(); ++r)
    for (std::size_t s = 0; s < b.size(); ++s)
      if (r == s || b(r, s) != 0.0)
        out << prefix << r + 1 << ',' << s + 1 << ','
            << logitnet::io::detail::format_double(b(r, s)) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LogitNet: sparse symmetric joint logistic regression for binary networks",
               "logitnet"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON config supplying any flag; flags override it");
  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads (<= 0: one per hardware thread)")
      ->capture_default_str();

  Run run;
  for (int k = 0; k < argc; ++k) run.argv.emplace_back(argv[k]);

  // simulate -----------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string sim_model = "chain", sim_prefix;
  std::size_t sim_n = 200;
  std::uint64_t sim_seed = 1;
  logitnet::sim::BackgroundParams sim_bg;
  sim_cmd->add_option("--model", sim_model, "chain, tree, or a pathway spec JSON")
      ->capture_default_str();
  sim_cmd->add_option("--n", sim_n, "Number of samples")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--delta", sim_bg.delta, "Background aberration probability")
      ->capture_default_str();
  sim_cmd->add_option("--nu", sim_bg.nu, "Background dependence rate")->capture_default_str();
  sim_cmd->add_option("--loci-per-chrom", sim_bg.loci_per_chrom)->capture_default_str();
  sim_cmd->add_option("--n-chrom", sim_bg.n_chrom)->capture_default_str();
  sim_cmd->add_option("--out-prefix", sim_prefix, "Output prefix")->required();

  // weights ------------------------------------------------------------------
  auto* w_cmd = app.add_subcommand("weights", "Estimate spatial penalty weights");
  DataArgs w_data;
  std::string w_out, w_format = "sparse";
  std::size_t w_window = logitnet::weights::kLoessWindow;
  w_data.add(w_cmd, true);
  w_cmd->add_option("--out", w_out, "Output file")->required();
  w_cmd->add_option("--format", w_format, "sparse (entries != 1) or dense")
      ->capture_default_str()
      ->check(CLI::IsMember({"sparse", "dense"}));
  w_cmd->add_option("--window", w_window, "Loess window in loci")->capture_default_str();

  // fit ----------------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Fit LogitNet or SepLogit at one lambda or a grid");
  DataArgs fit_data;
  SolverArgs fit_solver;
  WeightArgs fit_w;
  GridArgs fit_grid;
  std::string fit_method = "logitnet", fit_rule = "or", fit_prefix;
  double fit_lambda = -1.0;
  std::uint64_t fit_seed = 0;
  std::size_t fit_max_edges = 0;
  fit_data.add(fit_cmd, false);
  fit_solver.add(fit_cmd);
  fit_w.add(fit_cmd);
  fit_cmd->add_option("--method", fit_method)
      ->capture_default_str()
      ->check(CLI::IsMember({"logitnet", "seplogit"}));
  fit_cmd->add_option("--rule", fit_rule, "SepLogit reconciliation rule")
      ->capture_default_str()
      ->check(CLI::IsMember({"or", "and"}));
  auto* lam_opt = fit_cmd->add_option("--lambda", fit_lambda, "Single penalty value");
  auto* grid_opt = fit_cmd->add_option("--lambda-grid", fit_grid.size,
                                       "Grid size (log-spaced from lambda_max)");
  fit_cmd->add_option("--lambda-ratio", fit_grid.ratio)->capture_default_str();
  lam_opt->excludes(grid_opt);
  fit_cmd->add_option("--max-edges", fit_max_edges, "Stop a grid path past this many edges (0: never)")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_seed, "Recorded in the manifest; the solver is deterministic")
      ->capture_default_str();
  fit_cmd->add_option("--out-prefix", fit_prefix, "Output prefix")->required();

  // cv / bic -----------------------------------------------------------------
  auto* cv_cmd = app.add_subcommand("cv", "Select lambda by cross-validation with cv.vote");
  auto* bic_cmd = app.add_subcommand("bic", "Select lambda by BIC");
  DataArgs sel_data;
  SolverArgs sel_solver;
  WeightArgs sel_w;
  GridArgs sel_grid;
  int sel_folds = 10, sel_patience = 5;
  std::uint64_t sel_seed = 1;
  std::size_t sel_max_edges = 0;
  std::string sel_out;
  for (auto* sub : {cv_cmd, bic_cmd}) {
    sel_data.add(sub, false);
    sel_solver.add(sub);
    sel_w.add(sub);
    sel_grid.add(sub, "--grid-size");
    sub->add_option("--patience", sel_patience,
                    "Stop after this many grid points without improvement (0: never)")
        ->capture_default_str();
    sub->add_option("--max-edges", sel_max_edges, "Stop past this many edges (0: never)")
        ->capture_default_str();
    sub->add_option("--out", sel_out, "Output prefix")->required();
  }
  cv_cmd->add_option("--folds", sel_folds)->capture_default_str();
  cv_cmd->add_option("--seed", sel_seed, "Fold assignment seed")->capture_default_str();

  // evaluate -----------------------------------------------------------------
  auto* ev_cmd = app.add_subcommand("evaluate", "Score estimates against true edges");
  std::string ev_estimate, ev_truth, ev_out, ev_rule = "or";
  int ev_radius = logitnet::kDiamondRadius;
  ev_cmd->add_option("--estimate", ev_estimate, "Edge list, coefficient triplets or path file")
      ->required()
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("--truth", ev_truth, "True edge list (r<TAB>s)")
      ->required()
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("--radius", ev_radius, "Diamond radius")->capture_default_str();
  ev_cmd->add_option("--rule", ev_rule, "Rule for asymmetric estimates")
      ->capture_default_str()
      ->check(CLI::IsMember({"or", "and"}));
  ev_cmd->add_option("--out", ev_out, "Output prefix")->required();

  // impute -------------------------------------------------------------------
  auto* imp_cmd = app.add_subcommand("impute", "Multiply impute missing cells");
  DataArgs imp_data;
  SolverArgs imp_solver;
  int imp_reps = 10, imp_min_count = 4;
  std::uint64_t imp_seed = 1;
  double imp_pseudo = 0.5;
  std::string imp_prefix, imp_select = "none";
  imp_data.add(imp_cmd, true);
  imp_solver.add(imp_cmd);
  imp_cmd->add_option("--replicates", imp_reps)->capture_default_str();
  imp_cmd->add_option("--seed", imp_seed)->capture_default_str();
  imp_cmd->add_option("--pseudo-count", imp_pseudo, "Added to each table cell count")
      ->capture_default_str();
  imp_cmd->add_option("--select", imp_select,
                      "Also fit every copy (bic|cv) and write consensus edges")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "bic", "cv"}));
  imp_cmd->add_option("--min-count", imp_min_count, "Consensus threshold")->capture_default_str();
  imp_cmd->add_option("--out-prefix", imp_prefix, "Output prefix")->required();

  // oracle -------------------------------------------------------------------
  auto* or_cmd = app.add_subcommand("oracle", "Exact small-p model computations (JSON in/out)");
  std::string or_op, or_in = "-", or_out = "-";
  or_cmd->add_option("--op", or_op,
                     "joint_probability | conditional_log_odds_ratio | exact_mle "
                     "(else taken from the input's 'op')");
  or_cmd->add_option("--input", or_in, "Request JSON file or - for stdin")->capture_default_str();
  or_cmd->add_option("--out", or_out, "Response file or - for stdout")->capture_default_str();

  // bench --------------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "Simulation benchmark of both methods");
  logitnet::bench::Options bench_opt;
  bench_opt.cfg.tol = 1e-4;
  bench_opt.max_edges = 2000;
  std::string bench_model = "chain", bench_seeds, bench_out;
  int bench_reps = 10;
  bench_cmd->add_option("--model", bench_model, "chain, tree or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"chain", "tree", "both"}));
  bench_cmd->add_option("--replicates", bench_reps)->capture_default_str();
  bench_cmd->add_option("--seeds", bench_seeds, "a..b or a comma list (default 1..replicates)");
  bench_cmd->add_option("--n", bench_opt.n)->capture_default_str();
  bench_cmd->add_option("--grid-size", bench_opt.grid_size)->capture_default_str();
  bench_cmd->add_option("--lambda-ratio", bench_opt.grid_ratio)->capture_default_str();
  bench_cmd->add_option("--tol", bench_opt.cfg.tol)->capture_default_str();
  bench_cmd->add_option("--max-edges", bench_opt.max_edges,
                        "Stop each path past this many edges (0: never)")
      ->capture_default_str();
  bench_cmd->add_option("--radius", bench_opt.radius)->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Output prefix")->required();

  if (argc <= 1) {
    std::cerr << app.help();
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    Json err = {{"error", {{"kind", "usage_error"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n' << "Run with --help for usage.\n";
    return kUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  auto finish = [&](const std::string& manifest_path) {
    run.output(manifest_path);
    write_json(manifest_path, run.manifest(*sub, app));
  };

  try {
    if (sub == sim_cmd) {
      const auto spec = resolve_model(sim_model, sim_bg, run);
      run.seeds["simulate"] = sim_seed;
      const auto ds = logitnet::sim::gen_dataset(sim_bg, spec, sim_n, sim_seed);
      logitnet::io::save_binary_matrix(sim_prefix + ".csv", ds.x);
      auto ann = ds.annotation;
      ann.locus_ids = ds.x.locus_ids();
      logitnet::io::save_annotation(sim_prefix + ".annotation.tsv", ann);
      logitnet::io::save_edges(sim_prefix + ".truth.tsv", ds.truth);
      for (auto s : {".csv", ".annotation.tsv", ".truth.tsv"}) run.output(sim_prefix + s);
      finish(sim_prefix + ".manifest.json");
      std::cout << "wrote " << ds.x.rows() << " x " << ds.x.cols() << " matrix, "
                << ds.truth.size() << " true edges to " << sim_prefix << ".*\n";
    } else if (sub == w_cmd) {
      const auto x = w_data.load(run);
      const auto ann = w_data.load_annotation(run, x);
      auto wr = logitnet::weights::compute_weights(x, ann, jobs, w_window);
      run.warn_all(wr.warnings);
      std::ofstream out(w_out);
      if (!out) throw logitnet::Error("cannot open '" + w_out + "' for writing");
      if (w_format == "dense")
        logitnet::io::write_weights_dense(out, wr.w);
      else
        logitnet::io::write_weights_sparse(out, wr.w);
      out.close();
      run.output(w_out);
      finish(w_out + ".manifest.json");
    } else if (sub == fit_cmd) {
      const auto x = fit_data.load(run);
      logitnet::require_complete(x, "fit");
      const auto w = fit_w.resolve(run, fit_data, x, jobs);
      auto cfg = fit_solver.cfg;
      run.seeds["fit"] = fit_seed;
      const bool seplogit = fit_method == "seplogit";
      const auto rule = logitnet::parse_rule(fit_rule);
      Json meta = {{"method", fit_method}, {"p", x.cols()}, {"n", x.rows()}};
      if (seplogit) meta["rule"] = fit_rule;
      meta["solver"] = {{"tol", cfg.tol},
                        {"max_iter", cfg.max_iter},
                        {"step_cap", cfg.step_cap},
                        {"curvature_floor", cfg.curvature_floor}};
      if (lam_opt->count() > 0) {
        cfg.lambda = fit_lambda;
        const std::string coef = fit_prefix + ".coef.csv", edges = fit_prefix + ".edges.tsv";
        EdgeSet e;
        if (seplogit) {
          const auto res = logitnet::fit_seplogit(x, w, cfg, jobs);
          std::ofstream out(coef);
          if (!out) throw logitnet::Error("cannot open '" + coef + "' for writing");
          out << "r,s,beta\n";
          write_asymmetric(out, res.B, "");
          e = logitnet::reconcile(res.B, rule);
          meta["lambda"] = res.lambda;
          meta["converged"] = res.converged;
          meta["sweeps"] = res.sweeps;
          meta["warnings"] = res.warnings;
          run.warn_all(res.warnings);
        } else {
          const auto res = logitnet::fit(x, w, cfg);
          logitnet::io::save_coef_triplets(coef, res.B);
          e = logitnet::coef_to_edges(res.B);
          meta.update(fit_json(res));
          run.warn_all(res.warnings);
        }
        meta["edge_count"] = e.size();
        logitnet::io::save_edges(edges, e);
        run.output(coef);
        run.output(edges);
      } else {
        const std::string path = fit_prefix + ".path.csv";
        Json points = Json::array();
        if (seplogit) {
          const auto grid = logitnet::lambda_grid(logitnet::seplogit_lambda_max(x, w),
                                                  fit_grid.size, fit_grid.ratio);
          const auto fits = logitnet::fit_seplogit_path(x, w, grid, cfg, jobs, fit_max_edges);
          std::ofstream out(path);
          if (!out) throw logitnet::Error("cannot open '" + path + "' for writing");
          out << "lambda_index,lambda,r,s,beta\n";
          for (std::size_t k = 0; k < fits.size(); ++k) {
            points.push_back({{"lambda", fits[k].lambda},
                              {"skipped", fits[k].skipped},
                              {"converged", fits[k].converged},
                              {"edges", fits[k].skipped ? 0 : logitnet::reconcile(fits[k].B, rule).size()}});
            if (!fits[k].skipped)
              write_asymmetric(out, fits[k].B,
                               std::to_string(k) + "," +
                                   logitnet::io::detail::format_double(fits[k].lambda) + ",");
          }
        } else {
          const auto grid = logitnet::lambda_grid(logitnet::lambda_max(x, w), fit_grid.size,
                                                  fit_grid.ratio);
          const auto fits = logitnet::fit_path(x, w, grid, cfg, fit_max_edges);
          write_symmetric_path(path, fits);
          for (const auto& f : fits) {
            Json pt = f.skipped ? Json{{"lambda", f.lambda}, {"skipped", true}} : fit_json(f);
            points.push_back(pt);
            run.warn_all(f.warnings);
          }
        }
        meta["path"] = points;
        run.output(path);
      }
      write_json(fit_prefix + ".json", meta);
      run.output(fit_prefix + ".json");
      finish(fit_prefix + ".manifest.json");
    } else if (sub == cv_cmd || sub == bic_cmd) {
      const auto x = sel_data.load(run);
      logitnet::require_complete(x, run.command.c_str());
      const auto w = sel_w.resolve(run, sel_data, x, jobs);
      const auto grid = logitnet::lambda_grid(logitnet::lambda_max(x, w), sel_grid.size,
                                              sel_grid.ratio);
      logitnet::SelectionOptions opt;
      opt.cfg = sel_solver.cfg;
      opt.jobs = jobs;
      opt.max_edges = sel_max_edges;
      opt.patience = sel_patience;
      Json out;
      if (sub == cv_cmd) {
        run.seeds["folds"] = sel_seed;
        const auto res = logitnet::cross_validate(x, w, grid, sel_folds, sel_seed, opt);
        Json ll = Json::array();
        for (double v : res.cv_loglik) ll.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
        out = {{"lambda_grid", res.lambda_grid},
               {"cv_loglik", ll},
               {"index_cv", res.index_cv},
               {"lambda_cv", res.lambda_cv},
               {"folds", res.folds},
               {"votes", edges_json([&] {
                  EdgeSet all;
                  for (const auto& [e, v] : res.votes) {
                    all.insert(e.first, e.second);
                    all.votes[e] = v;
                  }
                  return all;
                }())},
               {"consensus", edges_json(res.consensus)},
               {"warnings", res.warnings}};
        run.warn_all(res.warnings);
        logitnet::io::save_edges(sel_out + ".consensus.tsv", res.consensus);
        run.output(sel_out + ".consensus.tsv");
      } else {
        const auto res = logitnet::bic_select(x, w, grid, opt);
        Json bic = Json::array();
        for (double v : res.bic) bic.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
        out = {{"lambda_grid", res.lambda_grid},
               {"bic", bic},
               {"support_size", res.support_size},
               {"index_bic", res.index_bic},
               {"lambda_bic", res.lambda_bic},
               {"tie", res.tie},
               {"support", edges_json(res.support)},
               {"warnings", res.warnings}};
        run.warn_all(res.warnings);
        logitnet::io::save_edges(sel_out + ".support.tsv", res.support);
        logitnet::io::save_coef_triplets(sel_out + ".coef.csv", res.B);
        run.output(sel_out + ".support.tsv");
        run.output(sel_out + ".coef.csv");
      }
      write_json(sel_out + ".json", out);
      run.output(sel_out + ".json");
      finish(sel_out + ".manifest.json");
    } else if (sub == ev_cmd) {
      run.input("estimate", ev_estimate);
      run.input("truth", ev_truth);
      const auto est = load_estimate(ev_estimate, logitnet::parse_rule(ev_rule));
      const auto truth = logitnet::io::load_edges(ev_truth);
      std::ofstream csv(ev_out + ".csv");
      if (!csv) throw logitnet::Error("cannot open '" + ev_out + ".csv' for writing");
      csv << "lambda_index,lambda,edges,fpr,fnr,total\n";
      Json summary;
      std::size_t best = 0;
      double best_total = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < est.edges.size(); ++k) {
        const auto sc = logitnet::score(est.edges[k], truth, ev_radius);
        csv << k << ',' << (std::isnan(est.lambda[k]) ? std::string("NA")
                                                       : logitnet::io::detail::format_double(est.lambda[k]))
            << ',' << sc.detections << ',' << logitnet::io::detail::format_double(sc.fpr) << ','
            << logitnet::io::detail::format_double(sc.fnr) << ','
            << logitnet::io::detail::format_double(sc.total()) << '\n';
        if (sc.total() < best_total) {
          best_total = sc.total();
          best = k;
        }
      }
      csv.close();
      const auto sc = logitnet::score(est.edges[best], truth, ev_radius);
      summary = {{"points", est.edges.size()},
                 {"radius", ev_radius},
                 {"best_index", best},
                 {"best_lambda", std::isnan(est.lambda[best]) ? Json(nullptr) : Json(est.lambda[best])},
                 {"fpr", sc.fpr},
                 {"fnr", sc.fnr},
                 {"optimal_total", sc.total()},
                 {"detections", sc.detections},
                 {"false_detections", sc.false_detections},
                 {"missed", sc.missed}};
      write_json(ev_out + ".json", summary);
      run.output(ev_out + ".csv");
      run.output(ev_out + ".json");
      finish(ev_out + ".manifest.json");
      std::cout << "optimal total error " << sc.total() << " (FPR " << sc.fpr << ", FNR "
                << sc.fnr << ") at point " << best << '\n';
    } else if (sub == imp_cmd) {
      const auto x = imp_data.load(run);
      const auto ann = imp_data.load_annotation(run, x);
      run.seeds["impute"] = imp_seed;
      logitnet::ImputeOptions opt{imp_pseudo, jobs};
      const auto res = logitnet::impute(x, ann, imp_reps, imp_seed, opt);
      run.warn_all(res.warnings);
      for (std::size_t k = 0; k < res.datasets.size(); ++k) {
        const auto path = imp_prefix + "." + std::to_string(k + 1) + ".csv";
        logitnet::io::save_binary_matrix(path, res.datasets[k]);
        run.output(path);
      }
      Json meta = {{"replicates", imp_reps},
                   {"missing_cells", x.missing_count()},
                   {"marginal_no_neighbour", res.marginal_no_neighbour},
                   {"marginal_zero_support", res.marginal_zero_support}};
      if (imp_select != "none") {
        std::vector<EdgeSet> sets;
        Json per = Json::array();
        for (const auto& xi : res.datasets) {
          const auto w = logitnet::weights::compute_weights(xi, ann, jobs).w;
          const auto grid = logitnet::lambda_grid(logitnet::lambda_max(xi, w));
          logitnet::SelectionOptions sopt;
          sopt.cfg = imp_solver.cfg;
          sopt.jobs = jobs;
          if (imp_select == "bic") {
            auto r = logitnet::bic_select(xi, w, grid, sopt);
            per.push_back({{"lambda", r.lambda_bic}, {"edges", r.support.size()}});
            sets.push_back(std::move(r.support));
          } else {
            auto r = logitnet::cross_validate(xi, w, grid, 10, imp_seed, sopt);
            per.push_back({{"lambda", r.lambda_cv}, {"edges", r.consensus.size()}});
            sets.push_back(std::move(r.consensus));
          }
        }
        const auto consensus = logitnet::consensus_edges(sets, imp_min_count);
        logitnet::io::save_edges(imp_prefix + ".consensus.tsv", consensus);
        run.output(imp_prefix + ".consensus.tsv");
        meta["selection"] = imp_select;
        meta["min_count"] = imp_min_count;
        meta["per_replicate"] = per;
        meta["consensus"] = edges_json(consensus);
      }
      write_json(imp_prefix + ".json", meta);
      run.output(imp_prefix + ".json");
      finish(imp_prefix + ".manifest.json");
    } else if (sub == or_cmd) {
      Json in;
      try {
        if (or_in == "-") {
          std::cin >> in;
        } else {
          std::ifstream f(or_in);
          if (!f) throw logitnet::Error("cannot open '" + or_in + "' for reading");
          run.input("request", or_in);
          f >> in;
        }
      } catch (const Json::exception& e) {
        throw logitnet::ParseError(std::string("oracle request is not valid JSON: ") + e.what());
      }
      const std::string op = !or_op.empty() ? or_op : in.value("op", std::string{});
      Json out;
      try {
        out = run_oracle(op, in);
      } catch (const Json::exception& e) {
        throw logitnet::ValidationError(std::string("malformed oracle request: ") + e.what());
      }
      if (or_out == "-") {
        out["manifest"] = run.manifest(*sub, app);
        std::cout << out.dump(2) << '\n';
      } else {
        write_json(or_out, out);
        run.output(or_out);
        finish(or_out + ".manifest.json");
      }
    } else if (sub == bench_cmd) {
      bench_opt.jobs = jobs;
      const auto seeds = bench_seeds.empty()
                             ? logitnet::bench::parse_seeds("1.." + std::to_string(bench_reps))
                             : logitnet::bench::parse_seeds(bench_seeds);
      std::vector<std::string> models;
      if (bench_model == "both")
        models = {"chain", "tree"};
      else
        models = {bench_model};
      std::ofstream csv(bench_out + ".csv");
      if (!csv) throw logitnet::Error("cannot open '" + bench_out + ".csv' for writing");
      csv << "model,seed,method,optimal_total,fpr,fnr,best_index,best_lambda,best_edges\n";
      Json summary = Json::object();
      run.seeds["bench"] = seeds;
      std::printf("%-6s %6s %10s %10s\n", "model", "seed", "logitnet", "seplogit");
      for (const auto& model : models) {
        const auto spec = resolve_model(model, bench_opt.background, run);
        std::vector<double> ln, sl;
        int wins = 0;
        for (auto seed : seeds) {
          const auto rep = logitnet::bench::run_replicate(spec, seed, bench_opt);
          run.warn_all(rep.weight_warnings);
          for (const auto* c : {&rep.logitnet, &rep.seplogit}) {
            const auto& s = c->scores[c->best];
            csv << model << ',' << seed << ',' << (c == &rep.logitnet ? "logitnet" : "seplogit")
                << ',' << logitnet::io::detail::format_double(c->optimal_total) << ','
                << logitnet::io::detail::format_double(s.fpr) << ','
                << logitnet::io::detail::format_double(s.fnr) << ',' << c->best << ','
                << logitnet::io::detail::format_double(c->lambda[c->best]) << ','
                << c->edges[c->best] << '\n';
          }
          ln.push_back(rep.logitnet.optimal_total);
          sl.push_back(rep.seplogit.optimal_total);
          if (ln.back() < sl.back()) ++wins;
          std::printf("%-6s %6llu %10.4f %10.4f\n", model.c_str(),
                      static_cast<unsigned long long>(seed), ln.back(), sl.back());
          std::fflush(stdout);
        }
        const auto a = logitnet::bench::summarize(ln), b = logitnet::bench::summarize(sl);
        summary[model] = {{"replicates", seeds.size()},
                          {"logitnet", {{"mean", a.mean}, {"sd", a.sd}}},
                          {"seplogit", {{"mean", b.mean}, {"sd", b.sd}}},
                          {"logitnet_better", wins}};
        std::printf("%-6s %6s %10.4f %10.4f   (sd %.4f / %.4f, logitnet better on %d/%zu)\n",
                    model.c_str(), "mean", a.mean, b.mean, a.sd, b.sd, wins, seeds.size());
      }
      csv.close();
      write_json(bench_out + ".json", summary);
      run.output(bench_out + ".csv");
      run.output(bench_out + ".json");
      finish(bench_out + ".manifest.json");
    }
  } catch (const logitnet::Error& e) {
    const bool input = dynamic_cast<const logitnet::ParseError*>(&e) ||
                       dynamic_cast<const logitnet::ValidationError*>(&e) ||
                       dynamic_cast<const logitnet::MissingDataError*>(&e);
    Json err = {{"error", {{"kind", e.kind()}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return input ? kInput : kRuntime;
  } catch (const std::exception& e) {
    Json err = {{"error", {{"kind", "internal_error"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return kRuntime;
  }
  return kOk;
}
