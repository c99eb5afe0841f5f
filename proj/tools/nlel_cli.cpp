// nlel: nonlocal elasticity driver.
//   nlel <subcommand> --config run.json [--out dir]
// exit codes: 0 ok, 2 bad config or input, 3 hypothesis failure (or a failed verify check), 4 solver failure

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "nlel/config.hpp"
#include "nlel/eringen.hpp"
#include "nlel/expression.hpp"
#include "nlel/localize.hpp"
#include "nlel/solve.hpp"
#include "nlel/verify.hpp"

namespace fs = std::filesystem;
using namespace nlel;

namespace {

struct Outputs {
  fs::path dir;
  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    out << text;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

Outputs prepare(const RunConfig& cfg, const std::string& out_flag) {
  Outputs o{out_flag.empty() ? fs::path(cfg.output) : fs::path(out_flag)};
  std::error_code ec;
  fs::create_directories(o.dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + o.dir.string() + ": " + ec.message());
  return o;
}

JsonOut header(const RunConfig& cfg, const char* sub) {
  JsonOut j;
  j.begin_object().key("config_hash").value(cfg.hash).key("subcommand").value(sub);
  j.key("config").raw(cfg.canonical);
  return j;
}

void solve_fields(JsonOut& j, const SolveReport& r) {
  j.key("energy").value(r.energy).key("residual").value(r.residual).key("iterations").value(r.iterations);
  j.key("converged").value(r.converged).key("dofs").value(r.dofs);
}

std::shared_ptr<Domain> solve_domain(const RunConfig& cfg, const Kernel& k) {
  if (!k.compact())
    throw ConfigError("quadrature solves need a compactly supported kernel (truncated_fractional, constant, table)");
  return std::make_shared<Domain>(build_domain(cfg.domain.box(), k.support, cfg.domain.h(), cfg.domain.collar));
}

int cmd_solve_dirichlet(const RunConfig& cfg, const Outputs& o) {
  hypothesis_gate(cfg);
  const Kernel k = cfg.make_kernel();
  auto dom = solve_domain(cfg, k);
  QuadOp op(k, dom);
  const SolveReport r = solve_dirichlet(cfg.tensor(), op, cfg.load_field(dom->lat), Constraint::ZeroOnComplement, cfg.solver);
  write_field_csv(o.path("solution.csv"), r.v);
  JsonOut j = header(cfg, "solve-dirichlet");
  solve_fields(j, r);
  j.key("domain").raw(domain_metadata_json(*dom, &r.v)).end_object();
  o.write("report.json", j.str());
  std::printf("solve-dirichlet: %d dofs, %d iterations, residual %.3e, energy %.17g\n", r.dofs, r.iterations,
              r.residual, r.energy);
  return 0;
}

int cmd_solve_neumann(const RunConfig& cfg, const Outputs& o) {
  hypothesis_gate(cfg);
  const Kernel k = cfg.make_kernel();
  auto dom = solve_domain(cfg, k);
  QuadOp op(k, dom);
  Field f = cfg.load_field(dom->lat);
  // an expression load is read as living on the inner region; a CSV load is taken as given
  if (!cfg.load.expr.empty())
    for (int i = 0; i < dom->size(); ++i)
      if (dom->region[i] != Region::Inner) f.v.row(i).setZero();
  const SolveReport r = solve_neumann(cfg.tensor(), op, f, cfg.solver, cfg.project_load);
  write_field_csv(o.path("solution.csv"), r.v);
  JsonOut j = header(cfg, "solve-neumann");
  solve_fields(j, r);
  j.key("nullspace_dim").value(r.nullspace_dim).key("collar_flux_max").value(r.collar_flux_max);
  j.key("load_projected").value(cfg.project_load);
  j.key("domain").raw(domain_metadata_json(*dom, &r.v)).end_object();
  o.write("report.json", j.str());
  std::printf("solve-neumann: %d dofs, null space %d, %d iterations, residual %.3e, energy %.17g\n", r.dofs,
              r.nullspace_dim, r.iterations, r.residual, r.energy);
  return 0;
}

int cmd_eringen(const RunConfig& cfg, const Outputs& o) {
  hypothesis_gate(cfg);
  const Kernel k = cfg.make_kernel();
  if (k.dim != 1) throw ConfigError("eringen-compare runs in one dimension only");
  if (!k.compact()) throw ConfigError("eringen-compare needs a compactly supported kernel");
  const FormComparison fc =
      eringen_study(k, cfg.tensor(), cfg.domain.box(), cfg.eringen.resolutions, cfg.eringen.trials, cfg.seed);
  std::string csv = "resolution,discrepancy,norm_discrepancy,mercer_min,scalar_identity\n";
  char buf[200];
  for (std::size_t i = 0; i < fc.resolutions.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", fc.resolutions[i], fc.discrepancies[i],
                  fc.norm_discrepancies[i], fc.mercer_min[i], fc.scalar_identity[i]);
    csv += buf;
    std::printf("N=%d  discrepancy %.3e  mercer_min %.3e\n", fc.resolutions[i], fc.discrepancies[i], fc.mercer_min[i]);
  }
  o.write("table.csv", csv);
  const EringenKernel A = build_eringen_kernel(k);
  JsonOut j = header(cfg, "eringen-compare");
  j.key("resolutions").begin_array();
  for (int r : fc.resolutions) j.value(r);
  j.end_array();
  j.key("discrepancies").value(fc.discrepancies).key("norm_discrepancies").value(fc.norm_discrepancies);
  j.key("mercer_min").value(fc.mercer_min).key("scalar_identity").value(fc.scalar_identity);
  j.key("mercer_ok").value(fc.mercer_ok);
  j.key("atilde").begin_object().key("support").value(A.support).key("alpha").value(A.alpha);
  j.key("r").value(A.r).key("value").value(A.a).end_object();
  j.end_object();
  o.write("report.json", j.str());
  return 0;
}

// regime defaults; h is the grid used by every member and the reference
struct RegimeDefaults {
  std::vector<double> params;
  int cells_per_unit;
};

RegimeDefaults defaults(Regime r) {
  switch (r) {
    case Regime::HorizonToZero: return {{0.4, 0.2, 0.1, 0.05}, 160};
    case Regime::HorizonToInfinity: return {{1, 2, 4, 8}, 64};
    case Regime::SToOne: return {{0.6, 0.7, 0.8, 0.9, 0.95}, 160};
    case Regime::NeumannHorizonToZero: return {{0.3, 0.2, 0.1}, 80};
  }
  return {};
}

int cmd_localize(const RunConfig& cfg, const Outputs& o, const std::string& regime_flag) {
  const Regime regime = parse_regime(regime_flag.empty() ? cfg.localize.regime : regime_flag);
  const Tensor C = cfg.tensor();
  const Ellipticity el = strong_ellipticity(C);
  if (!el.ok) throw HypothesisError("tensor is not strongly elliptic");
  if (!cfg.load.csv.empty()) throw ConfigError("localize needs an expression load (the grids change per member)");
  const RegimeDefaults def = defaults(regime);
  LocalizeSetup S;
  S.box = cfg.domain.box();
  S.h = 1.0 / (cfg.localize.N > 0 ? cfg.localize.N : def.cells_per_unit);
  S.C = C;
  S.solver = cfg.solver;
  S.b0 = cfg.kernel.b0;
  if (!cfg.load.expr.empty()) {
    auto ex = std::make_shared<std::vector<Expression>>();
    for (const auto& e : cfg.load.expr) ex->emplace_back(e);
    const int n = S.box.n;
    S.f = [ex, n](const double* x, double* out) {
      for (int c = 0; c < n; ++c) out[c] = (*ex)[ex->size() == 1 ? 0 : c](x);
    };
  }
  const std::vector<double> params = cfg.localize.params.empty() ? def.params : cfg.localize.params;
  const int n = S.box.n;
  LimitStudy st;
  switch (regime) {
    case Regime::HorizonToZero: {
      // the configured order, unit horizon
      const Kernel base = make_truncated_fractional(n, cfg.kernel.s, 1.0, cfg.kernel.b0);
      st = run_horizon_to_zero(base, S, params);
      break;
    }
    case Regime::HorizonToInfinity: {
      // flat part reaches r = 1, so the diverging rescaling stays positive on the unit ball
      const Kernel base = make_truncated_fractional(n, cfg.kernel.s, 2.0, cfg.kernel.b0);
      st = run_horizon_to_infinity(base, S, params);
      break;
    }
    case Regime::SToOne: st = run_s_to_one(cfg.localize.delta, S, params); break;
    case Regime::NeumannHorizonToZero: st = run_neumann_horizon_to_zero(cfg.localize.s, S, params); break;
  }
  o.write("table.csv", st.table_csv());
  write_field_csv(o.path("solution.csv"), st.members.back().v);
  JsonOut j = header(cfg, "localize");
  j.key("regime").value(regime_name(regime)).key("h").value(S.h);
  j.key("params").value(st.params).key("errors").value(st.errors).key("energies").value(st.energies);
  j.key("reference_norm").value(st.reference_norm).key("reference_energy").value(st.reference_energy);
  j.key("nonincreasing").value(st.nonincreasing()).key("final_ratio").value(st.final_ratio());
  if (regime == Regime::HorizonToInfinity) j.key("s_inf").value(st.s_inf).key("truncation").value(st.truncation);
  j.end_object();
  o.write("report.json", j.str());
  for (std::size_t i = 0; i < st.params.size(); ++i)
    std::printf("%s %-8g L2 error %.6e  (relative %.3e)\n", regime_name(regime), st.params[i], st.errors[i],
                st.reference_norm > 0 ? st.errors[i] / st.reference_norm : 0.0);
  return 0;
}

int cmd_verify(const RunConfig& cfg, const Outputs& o) {
  const VerifyReport rep = verify_suite(cfg);
  o.write("report.json", rep.json(cfg));
  for (const Check& c : rep.checks)
    std::printf("%-4s %-32s %.6e (threshold %.1e)%s%s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value,
                c.threshold, c.note.empty() ? "" : "  ", c.note.c_str());
  return rep.ok() ? 0 : 3;
}

int cmd_kernel_info(const RunConfig& cfg, const Outputs& o) {
  const Kernel k = cfg.make_kernel();
  const double eps = k.compact() ? 0.5 * k.support * cfg.kernel.b0 : 0.5;
  const HypothesisReport hr = check_hypotheses(k, eps, 20);
  const double mass = total_mass(k);
  // profile and potential on a geometric grid up to the support (or 4)
  const double top = k.compact() ? k.support : 4.0;
  std::string csv = "r,rho,Q\n";
  char buf[120];
  for (int i = 0; i <= 64; ++i) {
    const double r = top * std::pow(1e-3, 1.0 - i / 64.0);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r, k.profile(r), q_direct(k, r));
    csv += buf;
  }
  o.write("table.csv", csv);
  const std::vector<double> xis{0.1, 0.3, 1, 3, 10};
  std::vector<double> qh;
  for (double xi : xis) qh.push_back(q_hat(k, xi));
  JsonOut j = header(cfg, "kernel-info");
  j.key("name").value(k.name()).key("dim").value(k.dim).key("s").value(k.s).key("t").value(k.t);
  j.key("coef").value(k.coef).key("support").value(k.support).key("total_mass").value(mass);
  j.key("hypotheses").begin_object();
  j.key("H1").value(hr.h1).key("H2").value(hr.h2).key("H3").value(hr.h3).key("H4").value(hr.h4);
  j.key("H2_C1").value(hr.h2_c1).key("H2_C2").value(hr.h2_c2).key("H3_const").value(hr.h3_const);
  j.key("H4_const").value(hr.h4_const).key("eps").value(hr.eps).end_object();
  j.key("xi").value(xis).key("q_hat").value(qh).end_object();
  o.write("report.json", j.str());
  std::printf("%s  coef %.17g  support %g  mass %.6g\n", k.name().c_str(), k.coef, k.support, mass);
  std::printf("H1 %d  H2 %d  H3 %d  H4 %d\n", hr.h1, hr.h2, hr.h3, hr.h4);
  for (std::size_t i = 0; i < xis.size(); ++i) std::printf("q_hat(%g) = %.17g\n", xis[i], qh[i]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal elasticity solver"};
  app.require_subcommand(1);
  std::string config, out, regime;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (default: the config's output)");
    return sub;
  };
  CLI::App* sd = add("solve-dirichlet", "solve with zero displacement outside the domain");
  CLI::App* sn = add("solve-neumann", "traction-free solve, unique up to the null space");
  CLI::App* er = add("eringen-compare", "compare the bilinear form with its Eringen-type rewrite");
  CLI::App* lo = add("localize", "limit study: h0, hinf, s1 or neumann-h0");
  lo->add_option("--regime", regime, "overrides localize.regime");
  CLI::App* vf = add("verify", "run the identity and inequality checks");
  CLI::App* ki = add("kernel-info", "kernel constants, hypotheses and transforms");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    const RunConfig cfg = load_config(config);
    const Outputs o = prepare(cfg, out);
    if (sd->parsed()) return cmd_solve_dirichlet(cfg, o);
    if (sn->parsed()) return cmd_solve_neumann(cfg, o);
    if (er->parsed()) return cmd_eringen(cfg, o);
    if (lo->parsed()) return cmd_localize(cfg, o, regime);
    if (vf->parsed()) return cmd_verify(cfg, o);
    if (ki->parsed()) return cmd_kernel_info(cfg, o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const HypothesisError& e) {
    std::fprintf(stderr, "hypothesis failure: %s\n", e.what());
    return 3;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 2;
}
