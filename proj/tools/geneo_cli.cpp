// Command-line front end: generate, decompose, build-coarse, solve,
// verify-bounds, sweep, inspect-kernel and run.
//
// Every verb prints a JSON document on stdout (or writes it with --out).
// Exit codes: 0 success and all requested checks pass, 1 a check failed or
// PCG did not converge, 2 invalid input or a numerical error.

#include "geneo/core/matrix_market.hpp"
#include "geneo/solver/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

using namespace geneo;

namespace {

struct ProblemArgs {
  ProblemConfig pc;
  std::string pattern = "constant";
};

struct MethodArgs {
  std::string variant = "AS2";
  std::string soras_solver = "neumann";
  double tau = 0.5;
  double gamma = 0.0;  // 0 selects the default 2 k0
  std::string inexact = "exact";
  std::string basis = "orthonormal";
  bool no_near_kernel = false;
};

void add_problem_options(CLI::App* app, ProblemArgs& a, bool with_decomposition)
{
  app->add_option("--nx", a.pc.nx, "cells in x")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--ny", a.pc.ny, "cells in y")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--pattern", a.pattern, "constant | channels | checkerboard | random")->capture_default_str();
  app->add_option("--contrast", a.pc.contrast, "coefficient contrast rho >= 1")->capture_default_str();
  app->add_option("--seed", a.pc.seed, "seed of the random pattern")->capture_default_str();
  app->add_option("--eps-ratio", a.pc.eps_ratio, "mass coefficient relative to min nu")->capture_default_str();
  if (with_decomposition) {
    app->add_option("--px", a.pc.px, "subdomains in x")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--py", a.pc.py, "subdomains in y")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--overlap", a.pc.overlap, "overlap in face layers")->check(CLI::PositiveNumber)->capture_default_str();
  }
}

void add_method_options(CLI::App* app, MethodArgs& m)
{
  app->add_option("--method", m.variant, "AS1 | SORAS1 | AS2 | SORAS2 | AS2_inexact | SORAS2_inexact")->capture_default_str();
  app->add_option("--soras-solver", m.soras_solver, "neumann | dirichlet")->capture_default_str();
  app->add_option("--tau", m.tau, "lower threshold")->capture_default_str();
  app->add_option("--gamma", m.gamma, "upper threshold (default 2 k0)");
  app->add_option("--inexact", m.inexact, "exact | jacobi | block_jacobi[:b] | scaled[:a] | truncated_cholesky[:drop]")->capture_default_str();
  app->add_option("--basis", m.basis, "coarse basis: orthonormal | selected")->capture_default_str();
  app->add_flag("--no-near-kernel", m.no_near_kernel, "drop G_i from every subdomain");
}

ProblemConfig resolve(const ProblemArgs& a)
{
  ProblemConfig pc = a.pc;
  const auto p = parse_pattern(a.pattern);
  if (!p) throw ConfigError("unknown pattern '" + a.pattern + "'");
  pc.pattern = *p;
  return pc;
}

MethodConfig resolve(const MethodArgs& m)
{
  MethodConfig mc;
  const auto v = parse_variant(m.variant);
  if (!v) throw ConfigError("unknown method '" + m.variant + "'");
  mc.variant = *v;
  if (m.soras_solver == "neumann")
    mc.soras_solver = LocalSolver::neumann;
  else if (m.soras_solver == "dirichlet")
    mc.soras_solver = LocalSolver::dirichlet;
  else
    throw ConfigError("unknown soras solver '" + m.soras_solver + "'");
  mc.tau = m.tau;
  if (m.gamma > 0.0) mc.gamma = m.gamma;
  mc.inexact = parse_inexact(m.inexact);
  if (m.basis == "orthonormal")
    mc.basis = CoarseBasis::orthonormal;
  else if (m.basis == "selected")
    mc.basis = CoarseBasis::selected;
  else
    throw ConfigError("unknown basis '" + m.basis + "'");
  mc.use_near_kernel = !m.no_near_kernel;
  return mc;
}

void emit(const json& j, const std::string& out)
{
  const std::string text = j.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_atomic(out, text);
}

json problem_json(const Problem& p)
{
  return {{"nx", p.config.nx},
          {"ny", p.config.ny},
          {"pattern", to_string(p.config.pattern)},
          {"contrast", p.config.contrast},
          {"seed", p.config.seed},
          {"eps_ratio", p.config.eps_ratio},
          {"interior_edges", p.ms.dim()},
          {"interior_nodes", static_cast<Index>(p.ms.G.cols())}};
}

json decomposition_json(const Decomposition& d)
{
  std::vector<Index> dofs;
  for (Index i = 0; i < d.N; ++i) dofs.push_back(d.local_dim(i));
  json hist = json::object();
  for (const auto& [m, count] : multiplicity_histogram(d)) hist[std::to_string(m)] = count;
  return {{"N", d.N}, {"px", d.px}, {"py", d.py}, {"overlap", d.overlap}, {"k0", d.k0}, {"k1", d.k1}, {"global_dim", d.global_dim},
          {"dof_counts", dofs}, {"multiplicity_histogram", hist}, {"pou_max_error", verify_pou(d).max_error}};
}

json coarse_json(const MethodSetup& s)
{
  json j = {{"method", to_string(s.config.variant)},
            {"tau", s.tau},
            {"coarse_dim", s.cs.dim()},
            {"candidate_count", s.cs.candidate_count},
            {"selected_tau", s.cs.selected_tau},
            {"basis", to_string(s.config.basis)},
            {"tau0", s.one_level.tau0}};
  if (is_soras(s.config.variant)) {
    j["gamma"] = s.gamma;
    j["selected_gamma"] = s.cs.selected_gamma;
    j["gamma0"] = s.one_level.gamma0;
  }
  std::map<std::string, Index> by_source;
  for (const auto& t : s.cs.tags) ++by_source[to_string(t.source)];
  j["candidates_by_source"] = by_source;
  if (s.cs.has_inexact()) {
    j["inexact"] = s.cs.inexact->strategy.name();
    j["lambda_minus"] = s.cs.inexact->lambda_minus;
    j["lambda_plus"] = s.cs.inexact->lambda_plus;
    j["eps_A"] = s.cs.inexact->eps_A;
  }
  return j;
}

json element_json(const ModelSystem& ms)
{
  json faces = json::array();
  for (const auto& f : ms.faces) {
    if (!f.has_interior_dof()) continue;
    faces.push_back({{"dofs", f.dofs}, {"signs", f.signs}, {"nu", f.nu}});
  }
  return {{"faces", faces}, {"edge_mass", std::vector<double>(ms.edge_mass.data(), ms.edge_mass.data() + ms.edge_mass.size())}};
}

int cmd_generate(const ProblemArgs& a, const std::string& out_dir)
{
  ProblemConfig pc = resolve(a);
  const GridComplex gc = build_grid_complex(pc.nx, pc.ny);
  const CoefficientField cf = make_coefficients(gc, pc.pattern, pc.contrast, pc.seed, pc.eps_ratio);
  const ModelSystem ms = assemble_system(gc, cf);
  const std::filesystem::path dir(out_dir);
  write_atomic(dir / "A.mtx", [&](std::ostream& o) { mm::write_sparse_sym(o, ms.A, "system matrix on interior edges"); });
  write_atomic(dir / "G.mtx", [&](std::ostream& o) { mm::write_coordinate_general(o, ms.G_dense(), "discrete gradient, interior nodes to interior edges"); });
  write_atomic(dir / "elements.json", element_json(ms).dump() + "\n");
  json manifest = {{"nx", pc.nx}, {"ny", pc.ny}, {"pattern", to_string(pc.pattern)}, {"contrast", pc.contrast}, {"seed", pc.seed}, {"eps_ratio", pc.eps_ratio},
                   {"interior_edges", ms.dim()}, {"interior_nodes", static_cast<Index>(ms.G.cols())}, {"faces", gc.num_faces},
                   {"files", {"A.mtx", "G.mtx", "elements.json"}}};
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << "\n";
  return 0;
}

int cmd_inspect_kernel(const Problem& p, const MethodConfig& mc, Index i, const std::string& out)
{
  if (i < 0 || i >= p.d.N) throw ConfigError("--subdomain must lie in [0," + std::to_string(p.d.N) + ")");
  const bool soras = is_soras(mc.variant);
  KernelOptions ko;
  ko.solver = soras ? mc.soras_solver : LocalSolver::dirichlet;
  ko.use_near_kernel = mc.use_near_kernel;
  const SubdomainKernel sk = build_subdomain_kernel(p.ms, p.d, i, ko);
  const Index n = sk.dim();
  const Matrix v = random_matrix(n, 8, 7 + static_cast<std::uint64_t>(i));
  const Matrix xv = sk.xi0.apply(v);
  auto rel = [](const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); };
  json j = {{"subdomain", i},
            {"solver", to_string(sk.solver)},
            {"local_dim", n},
            {"raw_near_kernel_columns", sk.raw_columns},
            {"dim_G", sk.kernel_dim()},
            {"residuals",
             {{"xi0_idempotency", rel(sk.xi0.apply(xv), xv)},
              {"GtB_complement", (sk.G.transpose() * (sk.B * sk.xi0.complement(v))).norm() / std::max(1.0, v.norm())},
              {"Bdag_q_minus_Bdag", rel(sk.B_dag(sk.q.apply(v)), sk.B_dag(v))},
              {"q_symmetry", (sk.q.dense() - sk.q.dense().transpose()).norm()}}}};
  if (soras) {
    const double gamma = mc.gamma.value_or(2.0 * p.d.k0);
    const EigenPairs up = solve_gevp({GevpKind::upper_soras, i, gamma}, p.ms, p.d, sk);
    const SorasSubspaces ss = build_soras_subspaces(sk, up, gamma);
    j["gamma"] = gamma;
    j["dim_V_gamma"] = ss.V_gamma.cols();
    j["dim_W_gamma"] = ss.W_gamma.cols();
    j["mu_max"] = up.size() > 0 ? up.values[up.size() - 1] : 0.0;
    const Matrix ev = ss.eta(v);
    j["residuals"]["eta_idempotency"] = rel(ss.eta(ev), ev);
    if (ss.W_gamma.cols() > 0) j["residuals"]["B_tilde_dag_round_trip"] = rel(ss.B_tilde_dag(Matrix(sk.B * ss.W_gamma)), ss.W_gamma);
  }
  emit(j, out);
  return 0;
}

template <class F>
int guarded(F&& f)
{
  try {
    return f();
  } catch (const StageError& e) {
    json j = {{"error", e.what()}, {"stage", e.stage()}};
    std::cerr << j.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    json j = {{"error", e.what()}};
    std::cerr << j.dump() << "\n";
    return 2;
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Two-level overlapping Schwarz preconditioners with near-kernel-aware GenEO coarse spaces"};
  app.require_subcommand(1);
  int code = 0;

  ProblemArgs pa;
  MethodArgs ma;
  std::string out, out_dir, config_path;
  double rtol = 1e-8;
  int maxit = 500;
  std::string rhs = "manufactured";
  std::uint64_t rhs_seed = 1;
  bool history = false;
  Index subdomain = 0;
  std::vector<std::string> variants, inexacts;
  std::vector<double> contrasts, taus;
  bool no_verify = false;

  auto* gen = app.add_subcommand("generate", "assemble the model system and write Matrix Market files plus a manifest");
  add_problem_options(gen, pa, false);
  gen->add_option("--out-dir", out_dir, "output directory")->required();

  auto* dec = app.add_subcommand("decompose", "build the overlapping decomposition and report k0, k1 and dof counts");
  add_problem_options(dec, pa, true);
  dec->add_option("--out", out, "write JSON here instead of stdout");

  auto* coarse = app.add_subcommand("build-coarse", "solve the eigenproblems and assemble the coarse space");
  add_problem_options(coarse, pa, true);
  add_method_options(coarse, ma);
  coarse->add_option("--out", out, "write JSON here instead of stdout");
  coarse->add_option("--dump-dir", out_dir, "also write Z.mtx and E.mtx here");

  auto* sol = app.add_subcommand("solve", "run PCG with the chosen preconditioner");
  add_problem_options(sol, pa, true);
  add_method_options(sol, ma);
  sol->add_option("--rtol", rtol)->capture_default_str();
  sol->add_option("--maxit", maxit)->capture_default_str();
  sol->add_option("--rhs", rhs, "manufactured (b = A x*) | random")->capture_default_str();
  sol->add_option("--rhs-seed", rhs_seed)->capture_default_str();
  sol->add_flag("--history", history, "include the residual history");
  sol->add_option("--out", out, "write JSON here instead of stdout");

  auto* ver = app.add_subcommand("verify-bounds", "dense spectrum of the preconditioned operator against its bound");
  add_problem_options(ver, pa, true);
  add_method_options(ver, ma);
  ver->add_option("--out", out, "write JSON here instead of stdout");

  auto* sw = app.add_subcommand("sweep", "run a sweep and write CSV, JSON and SVG outputs");
  add_problem_options(sw, pa, true);
  add_method_options(sw, ma);
  sw->add_option("--variants", variants, "methods to sweep")->delimiter(',');
  sw->add_option("--contrasts", contrasts, "contrast values")->delimiter(',');
  sw->add_option("--taus", taus, "tau values")->delimiter(',');
  sw->add_option("--inexacts", inexacts, "coarse strategies for the inexact methods")->delimiter(',');
  sw->add_option("--rtol", rtol)->capture_default_str();
  sw->add_option("--maxit", maxit)->capture_default_str();
  sw->add_flag("--no-verify", no_verify, "skip the dense bound checks");
  sw->add_option("--out-dir", out_dir, "output directory")->required();

  auto* ins = app.add_subcommand("inspect-kernel", "near-kernel diagnostics of one subdomain");
  add_problem_options(ins, pa, true);
  add_method_options(ins, ma);
  ins->add_option("--subdomain", subdomain, "subdomain index")->required();
  ins->add_option("--out", out, "write JSON here instead of stdout");

  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) return guarded([&] { return cmd_generate(pa, out_dir); });

  if (dec->parsed())
    return guarded([&] {
      const Problem p = generate_and_decompose(resolve(pa));
      emit({{"problem", problem_json(p)}, {"decomposition", decomposition_json(p.d)}}, out);
      return verify_pou(p.d).passed() ? 0 : 1;
    });

  if (coarse->parsed())
    return guarded([&] {
      const Problem p = generate_and_decompose(resolve(pa));
      const MethodSetup s = run_stage("build-coarse", [&] { return build_method(p, resolve(ma)); });
      if (!out_dir.empty()) {
        const std::filesystem::path dir(out_dir);
        write_atomic(dir / "Z.mtx", [&](std::ostream& o) { mm::write_array(o, s.cs.Z, "coarse basis"); });
        write_atomic(dir / "E.mtx", [&](std::ostream& o) { mm::write_array(o, s.cs.E.values(), "coarse operator Z^T A Z"); });
      }
      emit(coarse_json(s), out);
      return 0;
    });

  if (sol->parsed())
    return guarded([&] {
      const Problem p = generate_and_decompose(resolve(pa));
      const MethodConfig mc = resolve(ma);
      SolveConfig sc;
      sc.rtol = rtol;
      sc.maxit = maxit;
      sc.seed = rhs_seed;
      sc.verify = false;
      if (rhs == "random")
        sc.rhs = RhsKind::random;
      else if (rhs != "manufactured")
        throw ConfigError("unknown rhs '" + rhs + "'");
      const PointResult r = run_method(p, mc, sc);
      if (!r.pcg) throw StageError(r.failed_stage, r.error);
      emit({{"method", to_string(mc.variant)}, {"coarse_dim", r.coarse_dim}, {"pcg", to_json(*r.pcg, history)}}, out);
      return r.pcg->converged ? 0 : 1;
    });

  if (ver->parsed())
    return guarded([&] {
      const Problem p = generate_and_decompose(resolve(pa));
      const MethodSetup s = run_stage("build-coarse", [&] { return build_method(p, resolve(ma)); });
      const BoundReport b = run_stage("verify", [&] { return verify_bounds(p, s); });
      emit(to_json(b), out);
      return b.satisfied && b.within_interval ? 0 : 1;
    });

  if (sw->parsed())
    return guarded([&] {
      ExperimentConfig c;
      c.problem = resolve(pa);
      c.method = resolve(ma);
      for (const auto& v : variants) {
        const auto p = parse_variant(v);
        if (!p) throw ConfigError("unknown method '" + v + "'");
        c.sweep.variants.push_back(*p);
      }
      for (const auto& s : inexacts) parse_inexact(s);
      c.sweep.contrast = contrasts;
      c.sweep.tau = taus;
      c.sweep.inexact = inexacts;
      c.solve.rtol = rtol;
      c.solve.maxit = maxit;
      c.solve.verify = !no_verify;
      c.output.dir = out_dir;
      const ExperimentResult r = run_experiment(c);
      std::cout << json({{"config_hash", r.hash}, {"points", r.points.size()}, {"all_passed", r.all_passed()}, {"files", r.files}}).dump(2) << "\n";
      return r.all_passed() ? 0 : 1;
    });

  if (ins->parsed())
    return guarded([&] {
      const Problem p = generate_and_decompose(resolve(pa));
      return cmd_inspect_kernel(p, resolve(ma), subdomain, out);
    });

  if (run->parsed())
    return guarded([&] {
      const ExperimentResult r = run_experiment_file(config_path);
      json summary = {{"config_hash", r.hash}, {"points", r.points.size()}, {"all_passed", r.all_passed()}, {"files", r.files}};
      if (r.config.output.dir.empty()) summary = to_json(r);
      std::cout << summary.dump(2) << "\n";
      return r.all_passed() ? 0 : 1;
    });

  return code;
}
