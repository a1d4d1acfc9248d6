#pragma once

/** @file experiment.hpp
    @brief JSON experiment configuration, stage-wise runs and result bundles.

    A config has the sections problem, decomposition, method, solve, sweep and
    output. Required: problem.nx, problem.ny, decomposition.px,
    decomposition.py, decomposition.overlap, method.variant. Every list in
    sweep multiplies the run; an empty or absent list keeps the base value.
*/

#include "geneo/solver/io.hpp"
#include "geneo/solver/pcg.hpp"
#include "geneo/solver/setup.hpp"
#include "geneo/solver/verify.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace geneo {

using json = nlohmann::json;

enum class RhsKind { manufactured, random };

struct SolveConfig {
  double rtol = 1e-8;
  int maxit = 500;
  RhsKind rhs = RhsKind::manufactured;  ///< manufactured: b = A x* with random x*
  std::uint64_t seed = 1;
  bool verify = true;                   ///< dense spectrum and bound check
};

struct SweepConfig {
  std::vector<Variant> variants;
  std::vector<double> contrast;
  std::vector<double> tau;
  std::vector<std::string> inexact;  ///< applies to the inexact variants only
};

struct OutputConfig {
  std::string dir;  ///< empty: nothing is written
  bool svg = true;
};

struct ExperimentConfig {
  ProblemConfig problem;
  MethodConfig method;
  SolveConfig solve;
  SweepConfig sweep;
  OutputConfig output;
};

// --- parsing ---------------------------------------------------------------

namespace detail {

class ConfigReader {
public:
  explicit ConfigReader(const json& root) : root_(root) {}

  const json* section(const std::string& name)
  {
    if (!root_.contains(name)) return nullptr;
    const json& s = root_.at(name);
    if (!s.is_object()) {
      problems_.push_back(name + ": expected an object");
      return nullptr;
    }
    return &s;
  }

  template <class T, class Check>
  std::optional<T> get(const json* sec, const std::string& sec_name, const std::string& key, bool required, Check ok, const char* expected)
  {
    const std::string path = sec_name + "." + key;
    if (sec == nullptr || !sec->contains(key)) {
      if (required) missing_.push_back(path);
      return std::nullopt;
    }
    const json& v = sec->at(key);
    if (!ok(v)) {
      problems_.push_back(path + ": expected " + expected);
      return std::nullopt;
    }
    return v.get<T>();
  }

  std::optional<Index> integer(const json* s, const std::string& sn, const std::string& k, bool req = false)
  {
    return get<Index>(s, sn, k, req, [](const json& v) { return v.is_number_integer(); }, "an integer");
  }
  std::optional<double> number(const json* s, const std::string& sn, const std::string& k, bool req = false)
  {
    return get<double>(s, sn, k, req, [](const json& v) { return v.is_number(); }, "a number");
  }
  std::optional<std::string> text(const json* s, const std::string& sn, const std::string& k, bool req = false)
  {
    return get<std::string>(s, sn, k, req, [](const json& v) { return v.is_string(); }, "a string");
  }
  std::optional<bool> boolean(const json* s, const std::string& sn, const std::string& k)
  {
    return get<bool>(s, sn, k, false, [](const json& v) { return v.is_boolean(); }, "a boolean");
  }

  void unknown_keys(const json* s, const std::string& sn, const std::set<std::string>& known)
  {
    if (s == nullptr) return;
    for (auto it = s->begin(); it != s->end(); ++it)
      if (!known.count(it.key())) problems_.push_back(sn + "." + it.key() + ": unknown field");
  }
  void problem(std::string p) { problems_.push_back(std::move(p)); }

  void top_level(const std::set<std::string>& known)
  {
    if (!root_.is_object()) {
      problems_.push_back("config: expected a JSON object");
      return;
    }
    for (auto it = root_.begin(); it != root_.end(); ++it)
      if (!known.count(it.key())) problems_.push_back(it.key() + ": unknown section");
  }

  void raise() const
  {
    if (missing_.empty() && problems_.empty()) return;
    std::string msg = "invalid experiment config";
    if (!missing_.empty()) {
      msg += "; missing required fields:";
      for (const auto& m : missing_) msg += " " + m;
    }
    for (const auto& p : problems_) msg += "; " + p;
    throw ConfigError(msg);
  }

private:
  const json& root_;
  std::vector<std::string> missing_;
  std::vector<std::string> problems_;
};

} // namespace detail

inline ExperimentConfig parse_config(const json& root)
{
  ExperimentConfig c;
  // null reads as an empty object so that the missing fields get listed
  const json& obj = root.is_null() ? json::object() : root;
  detail::ConfigReader rd(obj);
  rd.top_level({"problem", "decomposition", "method", "solve", "sweep", "output"});

  const json* pr = obj.is_object() ? rd.section("problem") : nullptr;
  if (auto v = rd.integer(pr, "problem", "nx", true)) c.problem.nx = *v;
  if (auto v = rd.integer(pr, "problem", "ny", true)) c.problem.ny = *v;
  if (auto v = rd.text(pr, "problem", "pattern")) {
    if (auto p = parse_pattern(*v))
      c.problem.pattern = *p;
    else
      rd.problem("problem.pattern: unknown pattern '" + *v + "'");
  }
  if (auto v = rd.number(pr, "problem", "contrast")) c.problem.contrast = *v;
  if (auto v = rd.integer(pr, "problem", "seed")) c.problem.seed = static_cast<std::uint64_t>(*v);
  if (auto v = rd.number(pr, "problem", "eps_ratio")) c.problem.eps_ratio = *v;
  rd.unknown_keys(pr, "problem", {"nx", "ny", "pattern", "contrast", "seed", "eps_ratio"});

  const json* de = obj.is_object() ? rd.section("decomposition") : nullptr;
  if (auto v = rd.integer(de, "decomposition", "px", true)) c.problem.px = *v;
  if (auto v = rd.integer(de, "decomposition", "py", true)) c.problem.py = *v;
  if (auto v = rd.integer(de, "decomposition", "overlap", true)) c.problem.overlap = *v;
  rd.unknown_keys(de, "decomposition", {"px", "py", "overlap"});

  const json* me = obj.is_object() ? rd.section("method") : nullptr;
  if (auto v = rd.text(me, "method", "variant", true)) {
    if (auto p = parse_variant(*v))
      c.method.variant = *p;
    else
      rd.problem("method.variant: unknown variant '" + *v + "'");
  }
  if (auto v = rd.text(me, "method", "soras_solver")) {
    if (*v == "neumann")
      c.method.soras_solver = LocalSolver::neumann;
    else if (*v == "dirichlet")
      c.method.soras_solver = LocalSolver::dirichlet;
    else
      rd.problem("method.soras_solver: expected 'neumann' or 'dirichlet'");
  }
  if (auto v = rd.number(me, "method", "tau")) c.method.tau = *v;
  if (auto v = rd.number(me, "method", "gamma")) c.method.gamma = *v;
  if (auto v = rd.text(me, "method", "inexact")) {
    try {
      c.method.inexact = parse_inexact(*v);
    } catch (const ParseError& e) {
      rd.problem(std::string("method.inexact: ") + e.what());
    }
  }
  if (auto v = rd.text(me, "method", "basis")) {
    if (*v == "orthonormal")
      c.method.basis = CoarseBasis::orthonormal;
    else if (*v == "selected")
      c.method.basis = CoarseBasis::selected;
    else
      rd.problem("method.basis: expected 'orthonormal' or 'selected'");
  }
  if (auto v = rd.boolean(me, "method", "use_near_kernel")) c.method.use_near_kernel = *v;
  rd.unknown_keys(me, "method", {"variant", "soras_solver", "tau", "gamma", "inexact", "basis", "use_near_kernel"});

  const json* so = obj.is_object() ? rd.section("solve") : nullptr;
  if (auto v = rd.number(so, "solve", "rtol")) c.solve.rtol = *v;
  if (auto v = rd.integer(so, "solve", "maxit")) c.solve.maxit = static_cast<int>(*v);
  if (auto v = rd.text(so, "solve", "rhs")) {
    if (*v == "manufactured")
      c.solve.rhs = RhsKind::manufactured;
    else if (*v == "random")
      c.solve.rhs = RhsKind::random;
    else
      rd.problem("solve.rhs: expected 'manufactured' or 'random'");
  }
  if (auto v = rd.integer(so, "solve", "seed")) c.solve.seed = static_cast<std::uint64_t>(*v);
  if (auto v = rd.boolean(so, "solve", "verify")) c.solve.verify = *v;
  rd.unknown_keys(so, "solve", {"rtol", "maxit", "rhs", "seed", "verify"});

  const json* sw = obj.is_object() ? rd.section("sweep") : nullptr;
  if (sw != nullptr) {
    auto list = [&](const std::string& key, auto&& each) {
      if (!sw->contains(key)) return;
      const json& a = sw->at(key);
      if (!a.is_array()) {
        rd.problem("sweep." + key + ": expected an array");
        return;
      }
      for (const auto& e : a) each(e);
    };
    list("variant", [&](const json& e) {
      if (e.is_string())
        if (auto p = parse_variant(e.get<std::string>())) return c.sweep.variants.push_back(*p);
      rd.problem("sweep.variant: unknown entry " + e.dump());
    });
    list("contrast", [&](const json& e) {
      if (e.is_number()) return c.sweep.contrast.push_back(e.get<double>());
      rd.problem("sweep.contrast: expected numbers");
    });
    list("tau", [&](const json& e) {
      if (e.is_number()) return c.sweep.tau.push_back(e.get<double>());
      rd.problem("sweep.tau: expected numbers");
    });
    list("inexact", [&](const json& e) {
      if (e.is_string()) {
        try {
          parse_inexact(e.get<std::string>());
          return c.sweep.inexact.push_back(e.get<std::string>());
        } catch (const ParseError&) {
        }
      }
      rd.problem("sweep.inexact: invalid entry " + e.dump());
    });
  }
  rd.unknown_keys(sw, "sweep", {"variant", "contrast", "tau", "inexact"});

  const json* ou = obj.is_object() ? rd.section("output") : nullptr;
  if (auto v = rd.text(ou, "output", "dir")) c.output.dir = *v;
  if (auto v = rd.boolean(ou, "output", "svg")) c.output.svg = *v;
  rd.unknown_keys(ou, "output", {"dir", "svg"});

  if (c.problem.nx < 1 || c.problem.ny < 1) rd.problem("problem.nx, problem.ny: must be >= 1");
  if (!(c.problem.contrast >= 1.0)) rd.problem("problem.contrast: must be >= 1");
  if (!(c.problem.eps_ratio > 0.0)) rd.problem("problem.eps_ratio: must be > 0");
  if (c.problem.px < 1 || c.problem.py < 1) rd.problem("decomposition.px, decomposition.py: must be >= 1");
  if (c.problem.overlap < 1) rd.problem("decomposition.overlap: must be >= 1");
  if (!(c.method.tau > 0.0)) rd.problem("method.tau: must be > 0");
  if (c.method.gamma && !(*c.method.gamma > 0.0)) rd.problem("method.gamma: must be > 0");
  if (!(c.solve.rtol > 0.0 && c.solve.rtol < 1.0)) rd.problem("solve.rtol: must lie in (0,1)");
  if (c.solve.maxit < 1) rd.problem("solve.maxit: must be >= 1");
  rd.raise();
  return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline std::string to_string(RhsKind k) { return k == RhsKind::manufactured ? "manufactured" : "random"; }
inline std::string to_string(CoarseBasis b) { return b == CoarseBasis::orthonormal ? "orthonormal" : "selected"; }

/// Fully resolved config (defaults filled in), the input of the content hash.
inline json resolved_json(const ExperimentConfig& c)
{
  json j;
  j["problem"] = {{"nx", c.problem.nx},
                  {"ny", c.problem.ny},
                  {"pattern", to_string(c.problem.pattern)},
                  {"contrast", c.problem.contrast},
                  {"seed", c.problem.seed},
                  {"eps_ratio", c.problem.eps_ratio}};
  j["decomposition"] = {{"px", c.problem.px}, {"py", c.problem.py}, {"overlap", c.problem.overlap}};
  j["method"] = {{"variant", to_string(c.method.variant)},
                 {"soras_solver", to_string(c.method.soras_solver)},
                 {"tau", c.method.tau},
                 {"inexact", c.method.inexact.name()},
                 {"basis", to_string(c.method.basis)},
                 {"use_near_kernel", c.method.use_near_kernel}};
  if (c.method.gamma) j["method"]["gamma"] = *c.method.gamma;
  j["solve"] = {{"rtol", c.solve.rtol}, {"maxit", c.solve.maxit}, {"rhs", to_string(c.solve.rhs)}, {"seed", c.solve.seed}, {"verify", c.solve.verify}};
  json sv = json::array();
  for (Variant v : c.sweep.variants) sv.push_back(to_string(v));
  j["sweep"] = {{"variant", sv}, {"contrast", c.sweep.contrast}, {"tau", c.sweep.tau}, {"inexact", c.sweep.inexact}};
  j["output"] = {{"dir", c.output.dir}, {"svg", c.output.svg}};
  return j;
}

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data)
{
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[k] = digits[h & 0xf];
  return out;
}

inline std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(resolved_json(c).dump()); }

// --- running ---------------------------------------------------------------

/// An exception tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct PointResult {
  ProblemConfig problem;
  MethodConfig method;
  bool ok = false;
  std::string failed_stage;
  std::string error;
  Index global_dim = 0;
  int k0 = 0, k1 = 0;
  Index coarse_dim = 0;
  std::vector<Index> selected_tau, selected_gamma;
  std::optional<PcgResult> pcg;
  std::optional<BoundReport> bound;

  /// No stage failed and, when verified, kappa and the interval bound hold.
  bool passed(bool verify) const { return ok && (!verify || (bound && bound->satisfied && bound->within_interval)); }
};

inline Vector make_rhs(const Problem& p, const SolveConfig& sc)
{
  const Vector r = random_vector(p.ms.dim(), sc.seed);
  return sc.rhs == RhsKind::manufactured ? Vector(p.ms.A.multiply(r)) : r;
}

/// Stages from build-coarse on, for an already generated and decomposed problem.
inline PointResult run_method(const Problem& p, const MethodConfig& mc, const SolveConfig& sc)
{
  PointResult r;
  r.problem = p.config;
  r.method = mc;
  r.global_dim = p.ms.dim();
  r.k0 = p.d.k0;
  r.k1 = p.d.k1;
  try {
    const MethodSetup s = run_stage("build-coarse", [&] { return build_method(p, mc); });
    r.coarse_dim = s.cs.dim();
    r.selected_tau = s.cs.selected_tau;
    r.selected_gamma = s.cs.selected_gamma;
    const Preconditioner M = run_stage("build-coarse", [&] { return s.preconditioner(p.d); });
    r.pcg = run_stage("solve", [&] {
      PcgOptions po;
      po.rtol = sc.rtol;
      po.maxit = sc.maxit;
      return solve(p, M, make_rhs(p, sc), po);
    });
    if (sc.verify) r.bound = run_stage("verify", [&] { return make_report(p, s, preconditioned_spectrum(p.ms.A, M)); });
    r.ok = true;
    if (!r.pcg->converged) {
      r.ok = false;
      r.failed_stage = "solve";
      r.error = "no convergence within " + std::to_string(sc.maxit) + " iterations";
    }
  } catch (const StageError& e) {
    r.ok = false;
    r.failed_stage = e.stage();
    r.error = e.what();
  }
  return r;
}

inline Problem generate_and_decompose(const ProblemConfig& pc)
{
  Problem p;
  p.config = pc;
  run_stage("generate", [&] {
    p.gc = build_grid_complex(pc.nx, pc.ny);
    p.cf = make_coefficients(p.gc, pc.pattern, pc.contrast, pc.seed, pc.eps_ratio);
    p.ms = assemble_system(p.gc, p.cf);
    if (p.ms.dim() == 0) throw SizeMismatch("the grid has no interior edges");
    return 0;
  });
  run_stage("decompose", [&] {
    p.d = decompose(p.ms, p.gc, pc.px, pc.py, pc.overlap);
    return 0;
  });
  return p;
}

/// Sweep points in order variant, contrast, tau, inexact strategy.
inline std::vector<std::pair<ProblemConfig, MethodConfig>> expand_sweep(const ExperimentConfig& c)
{
  const auto variants = c.sweep.variants.empty() ? std::vector<Variant>{c.method.variant} : c.sweep.variants;
  const auto contrasts = c.sweep.contrast.empty() ? std::vector<double>{c.problem.contrast} : c.sweep.contrast;
  const auto taus = c.sweep.tau.empty() ? std::vector<double>{c.method.tau} : c.sweep.tau;
  std::vector<std::pair<ProblemConfig, MethodConfig>> out;
  for (Variant v : variants)
    for (double rho : contrasts)
      for (double tau : taus) {
        ProblemConfig pc = c.problem;
        pc.contrast = rho;
        MethodConfig mc = c.method;
        mc.variant = v;
        mc.tau = tau;
        if (is_inexact(v) && !c.sweep.inexact.empty()) {
          for (const auto& s : c.sweep.inexact) {
            mc.inexact = parse_inexact(s);
            out.emplace_back(pc, mc);
          }
        } else {
          out.emplace_back(pc, mc);
        }
      }
  return out;
}

struct ExperimentResult {
  ExperimentConfig config;
  std::string hash;
  std::vector<PointResult> points;
  std::vector<std::string> files;

  bool all_passed() const
  {
    for (const auto& p : points)
      if (!p.passed(config.solve.verify)) return false;
    return !points.empty();
  }
};

// --- serialization -----------------------------------------------------------

inline json to_json(const BoundReport& r)
{
  json j = {{"method", r.method},       {"tau", r.tau},
            {"gamma", r.gamma},         {"k0", r.k0},
            {"k1", r.k1},               {"coarse_dim", r.coarse_dim},
            {"lambda_min", r.lambda_min}, {"lambda_max", r.lambda_max},
            {"c_T", r.c_T},             {"c_R", r.c_R},
            {"kappa_exact", r.kappa_exact}, {"kappa_bound", r.kappa_bound},
            {"satisfied", r.satisfied}, {"within_interval", r.within_interval},
            {"margin", r.margin}};
  if (r.tau0) j["tau0"] = *r.tau0;
  if (r.gamma0) j["gamma0"] = *r.gamma0;
  if (r.lambda_minus) j["lambda_minus"] = *r.lambda_minus;
  if (r.lambda_plus) j["lambda_plus"] = *r.lambda_plus;
  if (r.eps_A) j["eps_A"] = *r.eps_A;
  return j;
}

inline json to_json(const PcgResult& r, bool with_history = true)
{
  json j = {{"iterations", r.iterations},     {"converged", r.converged},       {"true_residual", r.true_residual},
            {"ritz_min", r.ritz_min},         {"ritz_max", r.ritz_max},         {"kappa_estimate", r.kappa_estimate},
            {"final_residual", r.residual_history.empty() ? 0.0 : r.residual_history.back()}};
  if (with_history) j["residual_history"] = r.residual_history;
  return j;
}

inline std::string point_label(const PointResult& p)
{
  std::string s = to_string(p.method.variant) + " rho=" + format_number(p.problem.contrast) + " tau=" + format_number(p.method.tau);
  if (is_inexact(p.method.variant)) s += " " + p.method.inexact.name();
  return s;
}

inline json to_json(const PointResult& p, bool verify)
{
  json j = {{"label", point_label(p)},
            {"variant", to_string(p.method.variant)},
            {"contrast", p.problem.contrast},
            {"tau", p.method.tau},
            {"inexact", p.method.inexact.name()},
            {"global_dim", p.global_dim},
            {"k0", p.k0},
            {"k1", p.k1},
            {"coarse_dim", p.coarse_dim},
            {"selected_tau", p.selected_tau},
            {"selected_gamma", p.selected_gamma},
            {"ok", p.ok},
            {"passed", p.passed(verify)}};
  if (!p.failed_stage.empty()) {
    j["failed_stage"] = p.failed_stage;
    j["error"] = p.error;
  }
  if (p.pcg) j["pcg"] = to_json(*p.pcg);
  if (p.bound) j["bound"] = to_json(*p.bound);
  return j;
}

inline json to_json(const ExperimentResult& r)
{
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p, r.config.solve.verify));
  return {{"config", resolved_json(r.config)}, {"config_hash", r.hash}, {"all_passed", r.all_passed()}, {"points", pts}};
}

inline CsvTable results_table(const ExperimentResult& r)
{
  CsvTable t({"config_hash", "variant", "contrast", "tau", "gamma", "inexact", "global_dim", "k0", "k1", "coarse_dim", "iterations", "converged", "true_residual",
              "kappa_estimate", "lambda_min", "lambda_max", "kappa_exact", "c_T", "c_R", "kappa_bound", "satisfied", "within_interval", "status", "failed_stage"});
  for (const auto& p : r.points) {
    const auto& b = p.bound;
    auto num = [](bool has, double v) { return has ? format_number(v) : std::string(); };
    t.add_row({r.hash,
               to_string(p.method.variant),
               format_number(p.problem.contrast),
               format_number(p.method.tau),
               num(b.has_value(), b ? b->gamma : 0.0),
               is_inexact(p.method.variant) ? p.method.inexact.name() : "",
               std::to_string(p.global_dim),
               std::to_string(p.k0),
               std::to_string(p.k1),
               std::to_string(p.coarse_dim),
               p.pcg ? std::to_string(p.pcg->iterations) : "",
               p.pcg ? (p.pcg->converged ? "true" : "false") : "",
               num(p.pcg.has_value(), p.pcg ? p.pcg->true_residual : 0.0),
               num(p.pcg.has_value(), p.pcg ? p.pcg->kappa_estimate : 0.0),
               num(b.has_value(), b ? b->lambda_min : 0.0),
               num(b.has_value(), b ? b->lambda_max : 0.0),
               num(b.has_value(), b ? b->kappa_exact : 0.0),
               num(b.has_value(), b ? b->c_T : 0.0),
               num(b.has_value(), b ? b->c_R : 0.0),
               num(b.has_value(), b ? b->kappa_bound : 0.0),
               b ? (b->satisfied ? "true" : "false") : "",
               b ? (b->within_interval ? "true" : "false") : "",
               p.passed(r.config.solve.verify) ? "pass" : "fail",
               p.failed_stage});
  }
  return t;
}

inline std::string residual_plot(const ExperimentResult& r)
{
  std::vector<PlotSeries> series;
  for (const auto& p : r.points) {
    if (!p.pcg) continue;
    PlotSeries s;
    s.label = point_label(p);
    for (std::size_t k = 0; k < p.pcg->residual_history.size(); ++k) {
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(p.pcg->residual_history[k]);
    }
    series.push_back(std::move(s));
  }
  PlotOptions o;
  o.title = "PCG residual history";
  o.x_label = "iteration";
  o.y_label = "||r|| / ||b||";
  o.width = 900;
  return svg_line_plot(series, o);
}

inline std::string kappa_plot(const ExperimentResult& r)
{
  PlotSeries exact{"kappa exact", {}, {}, false}, bound{"kappa bound", {}, {}, true};
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    if (!r.points[k].bound) continue;
    exact.x.push_back(static_cast<double>(k));
    exact.y.push_back(r.points[k].bound->kappa_exact);
    bound.x.push_back(static_cast<double>(k));
    bound.y.push_back(r.points[k].bound->kappa_bound);
  }
  PlotOptions o;
  o.title = "condition number against bound";
  o.x_label = "sweep point (see results.csv row order)";
  o.y_label = "kappa";
  return svg_line_plot({exact, bound}, o);
}

/// Write report.json and results.csv (and SVG plots) into config.output.dir.
inline void write_outputs(ExperimentResult& r)
{
  if (r.config.output.dir.empty()) return;
  const std::filesystem::path dir(r.config.output.dir);
  r.files.clear();
  auto put = [&](const std::string& name, const std::string& text) {
    write_atomic(dir / name, text);
    r.files.push_back((dir / name).string());
  };
  put("results.csv", results_table(r).str());
  if (r.config.output.svg) {
    put("residuals.svg", residual_plot(r));
    if (r.points.size() > 1) put("kappa.svg", kappa_plot(r));
  }
  put("report.json", to_json(r).dump(2) + "\n");
}

/** @brief Run every sweep point. Stage failures are recorded in the point
    and do not stop later points; outputs are rewritten after every point so
    that an interrupted run leaves the finished points on disk.
*/
inline ExperimentResult run_experiment(const ExperimentConfig& c)
{
  ExperimentResult r;
  r.config = c;
  r.hash = config_hash(c);
  std::optional<Problem> cached;
  for (const auto& [pc, mc] : expand_sweep(c)) {
    try {
      if (!cached || cached->config.contrast != pc.contrast) {
        cached.reset();
        cached = generate_and_decompose(pc);
      }
      r.points.push_back(run_method(*cached, mc, c.solve));
    } catch (const StageError& e) {
      PointResult p;
      p.problem = pc;
      p.method = mc;
      p.failed_stage = e.stage();
      p.error = e.what();
      r.points.push_back(std::move(p));
    }
    write_outputs(r);
  }
  return r;
}

inline ExperimentResult run_experiment_file(const std::string& path) { return run_experiment(load_config(path)); }

} // namespace geneo
