// specdiff: experiment driver for the specular-diffusion toolkit.
//
// Subcommands: trace, operator, equilibrium, kinetic, macro, limit-study.
// All read a flat key=value config; flags override config values.
// Exit codes: 0 ok, 2 config error, 3 numeric error, 4 io error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "specdiff/config.hpp"
#include "specdiff/geometry.hpp"
#include "specdiff/io.hpp"
#include "specdiff/kinetic.hpp"
#include "specdiff/macro.hpp"
#include "specdiff/operators.hpp"
#include "specdiff/stable.hpp"

namespace {

using namespace specdiff;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

DomainShape domain_of(const RunConfig& cfg) {
  return cfg.domain == "disk" ? DomainShape::unit_ball(2) : DomainShape::half_space(1);
}

Vec1 bump_sampler_1d(RngStream& rng) {
  for (;;) {
    double x = rng.uniform(0.0, 8.0);
    double z = (x - 1.5) / 0.5;
    if (rng.uniform() < std::exp(-z * z)) return Vec1{{x}};
  }
}

Vec2 bump_sampler_disk(RngStream& rng) {
  for (;;) {
    Vec2 y{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
    if (norm2(y) < 1.0 &&
        rng.uniform() < std::exp(-8.0 * norm2(y - Vec2{{0.3, 0.0}})))
      return y;
  }
}

// Random endpoints of the reflected trajectory map. Columns cover both the
// 1-D and 2-D cases; unused coordinates are zero.
void run_trace(const RunConfig& cfg, Clock::time_point t0) {
  CsvTable t;
  t.header = {"x1", "x2", "v1", "v2", "end1", "end2", "dir1", "dir2", "reflections"};
  auto dom = domain_of(cfg);
  RngStream rng(stream_key(cfg.seed, 0x7ace, 0, 0));
  for (long i = 0; i < cfg.n; ++i) {
    if (dom.dim == 1) {
      double x = rng.uniform(0.0, 10.0);
      double v = rng.uniform(-20.0, 20.0);
      auto out = trace_eta(dom, Vec1{{x}}, Vec1{{v}});
      t.rows.push_back({x, 0.0, v, 0.0, out.endpoint[0], 0.0, out.final_dir[0], 0.0,
                        static_cast<double>(out.k)});
    } else {
      double r = std::sqrt(rng.uniform()) * 0.999;
      double a = rng.uniform(0.0, 6.283185307179586);
      Vec2 x{{r * std::cos(a), r * std::sin(a)}};
      double sp = rng.uniform(0.0, 20.0);
      double b = rng.uniform(0.0, 6.283185307179586);
      Vec2 v{{sp * std::cos(b), sp * std::sin(b)}};
      auto out = trace_eta(dom, x, v);
      t.rows.push_back({x[0], x[1], v[0], v[1], out.endpoint[0], out.endpoint[1],
                        out.final_dir[0], out.final_dir[1],
                        static_cast<double>(out.k)});
    }
  }
  write_artifact(fs::path(cfg.output_dir) / "trace.csv", t, cfg.canonical,
                 seconds_since(t0), cfg.warnings);
}

// Pointwise values of the nonlocal diffusion operator on a Gaussian bump.
void run_operator(const RunConfig& cfg, Clock::time_point t0) {
  CsvTable t;
  t.header = {"x1", "x2", "value"};
  OperatorConfig oc;
  oc.s = cfg.s;
  auto dom = domain_of(cfg);
  if (dom.dim == 1) {
    auto psi = [](const Vec1& y) { return std::exp(-(y[0] - 2.0) * (y[0] - 2.0)); };
    Grid1D g(0.05, 8.0, cfg.grid_n);
    for (long i = 0; i < g.n; ++i) {
      double x = g.center(i);
      t.rows.push_back({x, 0.0, apply_specular_op<1>(dom, psi, Vec1{{x}}, oc)});
    }
  } else {
    auto psi = [](const Vec2& y) { return std::exp(-2.0 * norm2(y)); };
    Grid1D g(0.02, 0.95, cfg.grid_n);
    for (long i = 0; i < g.n; ++i) {
      double r = g.center(i);
      t.rows.push_back({r, 0.0, apply_specular_op<2>(dom, psi, Vec2{{r, 0.0}}, oc)});
    }
  }
  write_artifact(fs::path(cfg.output_dir) / "operator.csv", t, cfg.canonical,
                 seconds_since(t0), cfg.warnings);
}

// Equilibrium velocity samples plus the tail-exponent estimate.
void run_equilibrium(const RunConfig& cfg, Clock::time_point t0) {
  int dim = cfg.domain == "disk" ? 2 : 1;
  EquilibriumSpec eq{cfg.s, dim};
  RngStream rng(stream_key(cfg.seed, 0xe911, 0, 0));
  CsvTable t;
  t.header = {"v1", "v2", "magnitude"};
  std::vector<double> mags;
  for (long i = 0; i < cfg.n; ++i) {
    if (dim == 1) {
      double v = sample_equilibrium<1>(eq, rng)[0];
      t.rows.push_back({v, 0.0, std::fabs(v)});
      mags.push_back(std::fabs(v));
    } else {
      Vec2 v = sample_equilibrium<2>(eq, rng);
      t.rows.push_back({v[0], v[1], norm(v)});
      mags.push_back(norm(v));
    }
  }
  write_artifact(fs::path(cfg.output_dir) / "equilibrium.csv", t, cfg.canonical,
                 seconds_since(t0), cfg.warnings);
  if (cfg.n >= 10000) {
    auto est = tail_exponent(mags, dim);
    CsvTable e;
    e.header = {"tail_exponent", "ci_lo", "ci_hi", "hill_index", "not_heavy"};
    e.rows.push_back({est.exponent, est.ci_lo, est.ci_hi, est.hill_index,
                      est.not_heavy ? 1.0 : 0.0});
    write_artifact(fs::path(cfg.output_dir) / "tail.csv", e, cfg.canonical,
                   seconds_since(t0), cfg.warnings);
  }
}

// Shared density CSV schema so kinetic and macro outputs diff directly.
CsvTable density_table_1d(const Grid1D& g, const std::vector<double>& rho) {
  CsvTable t;
  t.header = {"cell", "x1", "x2", "volume", "density"};
  for (long i = 0; i < g.n; ++i)
    t.rows.push_back({static_cast<double>(i), g.center(i), 0.0, g.h(), rho[i]});
  return t;
}

CsvTable density_table_2d(const PolarGrid& g, const std::vector<double>& rho) {
  CsvTable t;
  t.header = {"cell", "x1", "x2", "volume", "density"};
  for (long i = 0; i < g.n_r; ++i)
    for (long j = 0; j < g.n_t; ++j) {
      Vec2 c = g.center(i, j);
      t.rows.push_back({static_cast<double>(g.index(i, j)), c[0], c[1], g.area(i),
                        rho[g.index(i, j)]});
    }
  return t;
}

void run_kinetic(const RunConfig& cfg, Clock::time_point t0) {
  auto dom = domain_of(cfg);
  Boundary bc = cfg.bc == "absorb" ? Boundary::Absorb : Boundary::Specular;
  long nsteps = static_cast<long>(std::llround(cfg.T / cfg.dt));
  CsvTable t;
  if (dom.dim == 1) {
    auto ens = init_ensemble<1>(cfg.n, bump_sampler_1d, dom, cfg.s, cfg.eps, cfg.seed);
    for (long k = 0; k < nsteps; ++k) step<1>(ens, cfg.dt, dom, bc, cfg.workers);
    Grid1D g(0.0, 12.0, cfg.grid_n);
    auto f = density(ens, g);
    t = density_table_1d(g, f.rho);
  } else {
    auto ens = init_ensemble<2>(cfg.n, bump_sampler_disk, dom, cfg.s, cfg.eps, cfg.seed);
    for (long k = 0; k < nsteps; ++k) step<2>(ens, cfg.dt, dom, bc, cfg.workers);
    PolarGrid g(cfg.grid_n, 2 * cfg.grid_n);
    auto f = density(ens, g);
    t = density_table_2d(g, f.rho);
  }
  write_artifact(fs::path(cfg.output_dir) / "density.csv", t, cfg.canonical,
                 seconds_since(t0), cfg.warnings);
}

void run_macro(const RunConfig& cfg, Clock::time_point t0) {
  HeatProblem p;
  p.domain = domain_of(cfg);
  p.bc = cfg.bc == "absorb" ? BcKind::DirichletExterior : BcKind::Specular;
  p.s = cfg.s;
  p.T = cfg.T;
  p.dt = cfg.dt;
  CsvTable t;
  if (p.domain.dim == 1) {
    p.grid1 = Grid1D(0.0, 12.0, cfg.grid_n);
    auto op = assemble_operator(p);
    Eigen::VectorXd u0(cfg.grid_n);
    for (long i = 0; i < cfg.grid_n; ++i) {
      double z = (p.grid1.center(i) - 1.5) / 0.5;
      u0(i) = std::exp(-z * z);
    }
    auto sol = solve(p, op, u0);
    std::vector<double> rho(cfg.grid_n);
    for (long i = 0; i < cfg.grid_n; ++i) rho[i] = sol.snapshots.back()(i);
    t = density_table_1d(p.grid1, rho);
  } else {
    p.grid2 = PolarGrid(cfg.grid_n, 2 * cfg.grid_n);
    auto op = assemble_operator(p);
    Eigen::VectorXd u0(p.grid2.size());
    for (long i = 0; i < p.grid2.n_r; ++i)
      for (long j = 0; j < p.grid2.n_t; ++j)
        u0(p.grid2.index(i, j)) =
            std::exp(-8.0 * norm2(p.grid2.center(i, j) - Vec2{{0.3, 0.0}}));
    auto sol = solve(p, op, u0);
    std::vector<double> rho(p.grid2.size());
    for (long m = 0; m < p.grid2.size(); ++m) rho[m] = sol.snapshots.back()(m);
    t = density_table_2d(p.grid2, rho);
  }
  write_artifact(fs::path(cfg.output_dir) / "density.csv", t, cfg.canonical,
                 seconds_since(t0), cfg.warnings);
}

void run_limit_study(const RunConfig& cfg, Clock::time_point t0) {
  LimitStudyConfig lc;
  if (!cfg.eps_list.empty()) lc.eps_list = cfg.eps_list;
  lc.T = cfg.T;
  lc.dt = cfg.dt;
  lc.n = cfg.n;
  lc.s = cfg.s;
  lc.seed = cfg.seed;
  lc.workers = cfg.workers;
  auto rows = cfg.domain == "disk" ? limit_study_disk(lc) : limit_study_halfline(lc);
  CsvTable t;
  t.header = {"eps", "l2_error", "mc_stderr"};
  for (const auto& r : rows) t.rows.push_back({r.eps, r.l2_error, r.mc_stderr});
  write_artifact(fs::path(cfg.output_dir) / "errors.csv", t, cfg.canonical,
                 seconds_since(t0), cfg.warnings);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specular-diffusion experiment driver"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::string seed_str, workers_str;
  std::vector<CLI::App*> subs;
  for (const char* name :
       {"trace", "operator", "equilibrium", "kinetic", "macro", "limit-study"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key=value config file")->required();
    sub->add_option("--seed", seed_str, "RNG seed override");
    sub->add_option("--workers", workers_str, "worker thread count");
    sub->add_option("--out", out_dir, "output directory override");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  auto t0 = Clock::now();
  try {
    std::string name = app.get_subcommands().front()->get_name();
    std::map<std::string, std::string> overrides;
    if (!seed_str.empty()) overrides["seed"] = seed_str;
    if (!workers_str.empty()) overrides["workers"] = workers_str;
    else if (const char* env = std::getenv("SPECDIFF_WORKERS")) overrides["workers"] = env;
    if (!out_dir.empty()) overrides["output_dir"] = out_dir;

    specdiff::RunConfig cfg = specdiff::parse_config(name, config_path, overrides);
    for (const auto& w : cfg.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    if (name == "trace") run_trace(cfg, t0);
    else if (name == "operator") run_operator(cfg, t0);
    else if (name == "equilibrium") run_equilibrium(cfg, t0);
    else if (name == "kinetic") run_kinetic(cfg, t0);
    else if (name == "macro") run_macro(cfg, t0);
    else run_limit_study(cfg, t0);
  } catch (const specdiff::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const specdiff::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const specdiff::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  }
  return 0;
}
