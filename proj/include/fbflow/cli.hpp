#pragma once

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fbflow/core.hpp"
#include "fbflow/flows.hpp"
#include "fbflow/gallery.hpp"
#include "fbflow/lyapunov.hpp"
#include "fbflow/splitters.hpp"

namespace fbflow::cli {

using nlohmann::json;

/// Everything a solve/compare invocation needs. NaN / empty fields mean
/// "unset"; unset h and mu are resolved against the loaded problem.
struct RunConfig {
  std::string problem;
  std::string scheme = "fbn";
  std::string schemes;  // compare only: comma-separated list
  double h = kNaN;
  double mu = kNaN;
  double dt = 1e-2;
  double horizon = 50.0;
  std::string method = "rk4";
  double tol = 1e-10;
  long max_iters = 100000;
  unsigned seed = 0;
  bool override_admissibility = false;
  std::string x0;  // comma-separated coordinates; empty = seeded start
  std::string csv;
  std::string json_path;
  long record_every = 1;
};

inline const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names = {
      "fbn",         "fb-classical",   "fb-relaxed",
      "newton-flow", "semigroup-flow", "prox-grad-flow"};
  return names;
}

inline bool is_flow_scheme(const std::string& s) {
  return s == "newton-flow" || s == "semigroup-flow" || s == "prox-grad-flow";
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline Vector parse_vector_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(what) + ": expected a nonempty array");
  }
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ConfigError(std::string(what) + ": entries must be numbers");
    }
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Matrix parse_matrix_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(std::string(what) + ": expected an array of rows");
  }
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError(std::string(what) + ": ragged rows");
    }
    for (Index c = 0; c < cols; ++c) {
      M(i, c) = row[static_cast<size_t>(c)].get<double>();
    }
  }
  return M;
}

inline Proximable parse_phi(const json& j, Index dim);

inline Cocoercive parse_operator(const json& j, Index dim) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError("operator spec: expected an object with a 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "identity") {
    return quadratic_gradient(Matrix::Identity(dim, dim), Vector::Zero(dim));
  }
  if (type == "linear") {
    Matrix M = parse_matrix_json(j.at("M"), "linear.M");
    Vector off = j.contains("offset")
                     ? parse_vector_json(j.at("offset"), "linear.offset")
                     : Vector();
    return linear_map(std::move(M), std::move(off));
  }
  if (type == "quadratic-gradient") {
    return quadratic_gradient(parse_matrix_json(j.at("Q"), "Q"),
                              parse_vector_json(j.at("q"), "q"));
  }
  if (type == "contraction-residual") {
    Matrix A = parse_matrix_json(j.at("A"), "contraction-residual.A");
    Vector off = j.contains("offset")
                     ? parse_vector_json(j.at("offset"), "offset")
                     : Vector();
    return contraction_residual(std::move(A), std::move(off));
  }
  if (type == "rotation-residual") {
    const double th = j.at("theta").get<double>();
    Matrix R(2, 2);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return contraction_residual(std::move(R));
  }
  if (type == "yosida") {
    const double lambda = j.at("lambda").get<double>();
    return yosida(parse_phi(j.at("of"), dim), lambda);
  }
  throw ConfigError("operator spec: unknown type '" + type + "'");
}

inline Proximable parse_phi(const json& j, Index dim) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError("phi spec: expected an object with a 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return zero_function(dim);
  if (type == "half-sqnorm") return half_sqnorm(dim);
  if (type == "l1") {
    const double w = j.contains("weight") ? j.at("weight").get<double>() : 1.0;
    return l1_norm(dim, w);
  }
  if (type == "quadratic") {
    return convex_quadratic(parse_matrix_json(j.at("Q"), "Q"),
                            parse_vector_json(j.at("q"), "q"));
  }
  if (type == "box") {
    return box_indicator(parse_vector_json(j.at("lo"), "box.lo"),
                         parse_vector_json(j.at("hi"), "box.hi"));
  }
  if (type == "ball") {
    return ball_indicator(parse_vector_json(j.at("center"), "ball.center"),
                          j.at("radius").get<double>());
  }
  if (type == "halfspace") {
    return halfspace_indicator(parse_vector_json(j.at("a"), "halfspace.a"),
                               j.at("b").get<double>());
  }
  throw ConfigError("phi spec: unknown type '" + type + "'");
}

}  // namespace detail

/// A problem resolved from a RunConfig: either a gallery entry (carrying a
/// certified reference) or an inline JSON composition.
struct LoadedProblem {
  InclusionProblem problem;
  const GalleryEntry* entry = nullptr;  // null for inline problems
};

/// `spec` is a gallery name, an inline JSON object ({"dim":n, "phi":...,
/// "b":...}), or @path to a JSON file with the same shape.
inline LoadedProblem load_problem(const std::string& spec) {
  if (spec.empty()) throw ConfigError("no problem given");
  if (const GalleryEntry* e = find_entry(spec)) {
    return LoadedProblem{e->problem, e};
  }
  std::string text = spec;
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    if (!in) throw ConfigError("cannot open problem file '" + spec.substr(1) + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  if (text.empty() || detail::trim(text)[0] != '{') {
    throw ConfigError("unknown problem '" + spec +
                      "' (not a gallery name, inline JSON, or @file)");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem spec: invalid JSON: ") + e.what());
  }
  try {
    if (!j.contains("dim")) throw ConfigError("problem spec: missing 'dim'");
    const Index dim = j.at("dim").get<Index>();
    Proximable phi = detail::parse_phi(j.at("phi"), dim);
    Cocoercive b = detail::parse_operator(j.at("b"), dim);
    return LoadedProblem{InclusionProblem(std::move(phi), std::move(b)),
                         nullptr};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem spec: ") + e.what());
  }
}

inline Vector parse_point(const std::string& text, Index dim,
                          const char* what) {
  const auto parts = detail::split(text, ',');
  if (static_cast<Index>(parts.size()) != dim) {
    throw ConfigError(std::string(what) + ": expected " +
                      std::to_string(dim) + " comma-separated values");
  }
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    try {
      size_t pos = 0;
      v[i] = std::stod(detail::trim(parts[static_cast<size_t>(i)]), &pos);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": '" +
                        parts[static_cast<size_t>(i)] + "' is not a number");
    }
  }
  return v;
}

/// Deterministic start with entries on the grid [-3, 3] at resolution 1e-3.
inline Vector seeded_start(Index dim, unsigned seed) {
  std::mt19937 gen(seed);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = (static_cast<double>(gen() % 6001) / 1000.0) - 3.0;
  }
  return v;
}

inline IntegrationMethod parse_method(const std::string& m) {
  if (m == "rk4") return IntegrationMethod::rk4;
  if (m == "explicit-euler") return IntegrationMethod::explicit_euler;
  throw ConfigError("unknown method '" + m +
                    "' (expected rk4 or explicit-euler)");
}

namespace detail {

inline double config_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: invalid number for '" + key + "': " + v);
}

inline long config_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: invalid integer for '" + key + "': " + v);
}

inline bool config_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: invalid boolean for '" + key + "': " + v);
}

}  // namespace detail

/// Parses the flat config format: one `key = value` per line, `#` starts
/// a comment, blank lines ignored. Keys mirror the long flag names.
inline std::vector<std::pair<std::string, std::string>> parse_config_file(
    std::istream& in) {
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected 'key = value' at line " +
                        std::to_string(lineno));
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: empty key at line " +
                        std::to_string(lineno));
    }
    items.emplace_back(key, value);
  }
  return items;
}

/// Applies one config key to the run configuration; unknown keys are
/// configuration errors.
inline void set_config_key(RunConfig& cfg, const std::string& key,
                           const std::string& value) {
  if (key == "problem") cfg.problem = value;
  else if (key == "scheme") cfg.scheme = value;
  else if (key == "schemes") cfg.schemes = value;
  else if (key == "h") cfg.h = detail::config_double(key, value);
  else if (key == "mu") cfg.mu = detail::config_double(key, value);
  else if (key == "dt") cfg.dt = detail::config_double(key, value);
  else if (key == "horizon") cfg.horizon = detail::config_double(key, value);
  else if (key == "method") cfg.method = value;
  else if (key == "tol") cfg.tol = detail::config_double(key, value);
  else if (key == "max-iters") cfg.max_iters = detail::config_long(key, value);
  else if (key == "seed") {
    cfg.seed = static_cast<unsigned>(detail::config_long(key, value));
  } else if (key == "override-admissibility") {
    cfg.override_admissibility = detail::config_bool(key, value);
  } else if (key == "x0") cfg.x0 = value;
  else if (key == "csv") cfg.csv = value;
  else if (key == "json") cfg.json_path = value;
  else if (key == "record-every") {
    cfg.record_every = detail::config_long(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

/// Loads `path` and applies every key whose flag was not given on the
/// command line; `is_set(key)` reports whether the flag was given, so
/// command-line values always win.
template <typename Pred>
void apply_config_file(RunConfig& cfg, const std::string& path,
                       Pred&& is_set) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  for (const auto& [key, value] : parse_config_file(in)) {
    if (is_set(key)) continue;
    set_config_key(cfg, key, value);
  }
}

/// Writes the fixed-layout CSV: one row per recorded sample, absent
/// quantities as empty fields, 17 significant digits.
inline void write_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open CSV output '" + path + "'");
  static const char* columns[] = {"residual", "step_norm_sq", "b_error",
                                  "a_k",      "gamma_z",      "g_z",
                                  "k_z"};
  out << "index";
  for (const char* c : columns) out << ',' << c;
  out << '\n';
  const size_t n = trace.size();
  std::vector<const std::vector<double>*> cols;
  for (const char* c : columns) cols.push_back(trace.find_series(c));
  for (size_t r = 0; r < n; ++r) {
    out << fmt_double(trace.index[r]);
    for (const auto* col : cols) {
      out << ',';
      if (col != nullptr && r < col->size() && std::isfinite((*col)[r])) {
        out << fmt_double((*col)[r]);
      }
    }
    out << '\n';
  }
}

inline json summary_json(const Trace& trace, const InclusionProblem& p,
                         long iterations) {
  const Vector& limit = trace.final_state();
  const Vector b_limit = p.b(limit);
  json j;
  j["converged"] = trace.converged;
  j["iterations"] = iterations;
  j["final_residual"] = trace.final_series_value("residual");
  j["limit"] = std::vector<double>(limit.data(), limit.data() + limit.size());
  j["b_limit"] =
      std::vector<double>(b_limit.data(), b_limit.data() + b_limit.size());
  j["warnings"] = trace.warnings;
  return j;
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open JSON output '" + path + "'");
  out << j.dump(2) << '\n';
}

/// Prints the gallery table, optionally filtered by substring. An empty
/// match is not an error.
inline int cmd_list(const std::string& filter, std::ostream& out) {
  out << std::left << std::setw(24) << "name" << std::setw(5) << "dim"
      << std::setw(10) << "solutions" << "notes" << '\n';
  for (const auto& e : builtin_gallery()) {
    if (!filter.empty() && e.name.find(filter) == std::string::npos) continue;
    out << std::left << std::setw(24) << e.name << std::setw(5)
        << e.problem.dim() << std::setw(10)
        << (e.unique_solution ? "unique" : "multiple") << e.notes << '\n';
  }
  return 0;
}

namespace detail {

struct SchemeOutcome {
  Trace trace;
  long iterations = 0;
  double solver_mu = kNaN;  // prox parameter used (for anchor scaling)
};

/// Resolves defaults and runs one scheme. Throws ParameterError for
/// inadmissible parameters (unless overridden) and ConfigError for bad
/// names; never throws for non-convergence.
inline SchemeOutcome run_scheme(const LoadedProblem& lp,
                                const std::string& scheme, RunConfig cfg) {
  const InclusionProblem& p = lp.problem;
  const double beta = p.beta();
  // mu is the prox parameter of every scheme (the classical scheme proxes
  // with its step, so --mu IS its step); h relaxes fbn / fb-relaxed.
  const double mu = std::isnan(cfg.mu) ? beta : cfg.mu;
  const double h = std::isnan(cfg.h) ? 1.0 : cfg.h;

  Vector start = cfg.x0.empty() ? seeded_start(p.dim(), cfg.seed)
                                : parse_point(cfg.x0, p.dim(), "x0");

  SchemeOutcome out;
  if (!is_flow_scheme(scheme)) {
    StepPolicy policy = [&]() -> StepPolicy {
      Scheme s;
      if (scheme == "fbn") s = Scheme::fbn;
      else if (scheme == "fb-classical") s = Scheme::fb_classical;
      else if (scheme == "fb-relaxed") s = Scheme::fb_relaxed;
      else throw ConfigError("unknown scheme '" + scheme + "'");
      if (cfg.override_admissibility) {
        return StepPolicy::unchecked(s, s == Scheme::fb_classical ? mu : h,
                                     mu);
      }
      switch (s) {
        case Scheme::fbn: return StepPolicy::fbn(h, mu, beta);
        case Scheme::fb_classical: return StepPolicy::fb_classical(mu, beta);
        case Scheme::fb_relaxed: return StepPolicy::fb_relaxed(h, mu, beta);
      }
      throw ConfigError("unknown scheme '" + scheme + "'");
    }();
    out.solver_mu = policy.prox_param();
    RunOptions opts;
    opts.record_every = cfg.record_every;
    if (lp.entry != nullptr) {
      opts.reference = lp.entry->reference;
      opts.anchor = make_anchor(p, out.solver_mu, lp.entry->reference, 1e-8);
    }
    out.trace = run(p, policy, start, StopRule{cfg.tol, cfg.max_iters}, opts);
    out.iterations = static_cast<long>(out.trace.index.back());
    return out;
  }

  FlowConfig fc;
  fc.dt = cfg.dt;
  fc.horizon = cfg.horizon;
  fc.method = parse_method(cfg.method);
  fc.record_every = cfg.record_every;
  if (scheme == "newton-flow") {
    out.trace = newton_flow(p, mu, start, fc);
    out.solver_mu = mu;
  } else if (scheme == "semigroup-flow") {
    out.trace = semigroup_flow(p, start, fc);
    out.solver_mu = fc.dt;
  } else if (scheme == "prox-grad-flow") {
    out.trace = prox_grad_flow(p, mu, start, fc, cfg.override_admissibility);
    out.solver_mu = mu;
  } else {
    throw ConfigError("unknown scheme '" + scheme + "'");
  }
  out.iterations = std::max<long>(
      1, static_cast<long>(std::ceil(fc.horizon / fc.dt - 1e-9)));
  out.trace.converged = out.trace.final_series_value("residual") <= cfg.tol;
  if (lp.entry != nullptr) {
    annotate_with_anchor(out.trace, p, out.solver_mu,
                         make_anchor(p, out.solver_mu, lp.entry->reference,
                                     1e-8),
                         /*strict_duals=*/false);
  }
  return out;
}

}  // namespace detail

/// Runs one scheme and writes the requested outputs. Exit codes: 0 the run
/// converged, 2 it ran but did not converge; configuration and admissibility
/// errors throw (the binary maps them to exit 1).
inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const LoadedProblem lp = load_problem(cfg.problem);
  detail::SchemeOutcome r = detail::run_scheme(lp, cfg.scheme, cfg);
  if (!cfg.csv.empty()) write_csv(r.trace, cfg.csv);
  if (!cfg.json_path.empty()) {
    write_json(summary_json(r.trace, lp.problem, r.iterations),
               cfg.json_path);
  }
  out << "problem=" << cfg.problem << " scheme=" << cfg.scheme
      << " iterations=" << r.iterations << " final_residual="
      << fmt_double(r.trace.final_series_value("residual"))
      << " converged=" << (r.trace.converged ? "true" : "false") << '\n';
  for (const auto& w : r.trace.warnings) out << "warning: " << w << '\n';
  return r.trace.converged ? 0 : 2;
}

/// Runs several schemes on one problem (concurrently), writing one CSV per
/// scheme (paths <csv><scheme>.csv) and a JSON table with per-scheme
/// iterations and the final agreement of the operator images,
/// max_{i,j} ||B(limit_i) - B(limit_j)||. Inadmissible schemes are skipped
/// with a warning. Exit codes: 0 all runnable schemes converged, 2 some ran
/// without converging; an empty runnable set throws ConfigError.
inline int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const LoadedProblem lp = load_problem(cfg.problem);
  std::vector<std::string> schemes;
  for (auto& s : detail::split(cfg.schemes.empty() ? "fbn,fb-classical,fb-relaxed"
                                                   : cfg.schemes,
                               ',')) {
    const std::string name = detail::trim(s);
    if (name.empty()) continue;
    bool known = false;
    for (const auto& k : scheme_names()) known = known || k == name;
    if (!known) throw ConfigError("unknown scheme '" + name + "'");
    schemes.push_back(name);
  }
  if (schemes.empty()) throw ConfigError("no schemes given");

  struct Slot {
    std::string scheme;
    std::optional<detail::SchemeOutcome> outcome;
    std::string skip_reason;
  };
  std::vector<Slot> slots(schemes.size());
  std::vector<std::future<void>> futures;
  futures.reserve(schemes.size());
  for (size_t i = 0; i < schemes.size(); ++i) {
    slots[i].scheme = schemes[i];
    futures.push_back(std::async(std::launch::async, [&, i] {
      try {
        slots[i].outcome = detail::run_scheme(lp, schemes[i], cfg);
      } catch (const ParameterError& e) {
        slots[i].skip_reason = e.what();
      }
    }));
  }
  for (auto& f : futures) f.get();

  json table;
  table["problem"] = cfg.problem;
  json results = json::object();
  std::vector<Vector> b_images;
  bool any_ran = false, all_converged = true;
  for (auto& slot : slots) {
    if (!slot.outcome) {
      results[slot.scheme] = {{"skipped", true}, {"reason", slot.skip_reason}};
      out << "warning: scheme " << slot.scheme
          << " skipped: " << slot.skip_reason << '\n';
      continue;
    }
    any_ran = true;
    const Trace& t = slot.outcome->trace;
    all_converged = all_converged && t.converged;
    // first recorded index meeting the tolerance, if any
    const auto& res = *t.find_series("residual");
    json to_tol = nullptr;
    for (size_t r = 0; r < res.size(); ++r) {
      if (res[r] <= cfg.tol) {
        to_tol = t.index[r];
        break;
      }
    }
    results[slot.scheme] = {
        {"converged", t.converged},
        {"iterations", slot.outcome->iterations},
        {"iterations_to_tol", to_tol},
        {"final_residual", t.final_series_value("residual")}};
    b_images.push_back(lp.problem.b(t.final_state()));
    if (!cfg.csv.empty()) {
      write_csv(t, cfg.csv + slot.scheme + ".csv");
    }
  }
  if (!any_ran) {
    throw ConfigError("compare: every requested scheme was inadmissible");
  }
  double agreement = 0.0;
  for (size_t i = 0; i < b_images.size(); ++i) {
    for (size_t j = i + 1; j < b_images.size(); ++j) {
      agreement = std::max(agreement, (b_images[i] - b_images[j]).norm());
    }
  }
  table["results"] = results;
  table["b_image_agreement"] = agreement;
  if (!cfg.json_path.empty()) write_json(table, cfg.json_path);
  out << table.dump(2) << '\n';
  return all_converged ? 0 : 2;
}

}  // namespace fbflow::cli
