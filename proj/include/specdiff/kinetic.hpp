#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "specdiff/errors.hpp"
#include "specdiff/geometry.hpp"
#include "specdiff/grid.hpp"
#include "specdiff/macro.hpp"
#include "specdiff/rng.hpp"
#include "specdiff/stable.hpp"

namespace specdiff {

enum class Boundary { Absorb, Specular };

namespace detail {
// Stream purposes; part of the RNG key so draws never collide across uses.
inline constexpr uint64_t kPurposeInit = 0x1171;
inline constexpr uint64_t kPurposeStep = 0x57e9;
}  // namespace detail

/// Particle representation of the rescaled kinetic density. Absorbed
/// particles keep their slot (alive flag cleared) so indices and RNG streams
/// stay stable.
template <int D>
struct ParticleEnsemble {
  std::vector<Vec<D>> x, v;
  std::vector<uint8_t> alive;
  double eps = 0.1;
  double s = 0.5;
  double t = 0.0;          ///< macroscopic time
  uint64_t seed = 0;
  long step_index = 0;

  long size() const { return static_cast<long>(x.size()); }
  long alive_count() const {
    long c = 0;
    for (uint8_t a : alive) c += a;
    return c;
  }
  double mass() const {
    return size() == 0 ? 0.0
                       : static_cast<double>(alive_count()) / static_cast<double>(size());
  }
};

/// Well-prepared initial data: positions from rho_in (user-supplied sampler,
/// must land in the domain), velocities from the equilibrium law F.
template <int D>
inline ParticleEnsemble<D> init_ensemble(
    long n, const std::function<Vec<D>(RngStream&)>& sample_rho_in,
    const DomainShape& dom, double s, double eps, uint64_t seed) {
  if (n < 1) throw ConfigError("init_ensemble: need n >= 1");
  if (!(eps > 0.0) || !(s > 0.0 && s < 1.0))
    throw ConfigError("init_ensemble: need eps > 0, s in (0,1)");
  ParticleEnsemble<D> ens;
  ens.x.resize(n);
  ens.v.resize(n);
  ens.alive.assign(n, 1);
  ens.eps = eps;
  ens.s = s;
  ens.seed = seed;
  EquilibriumSpec eq{s, D};
  for (long i = 0; i < n; ++i) {
    RngStream rng(stream_key(seed, detail::kPurposeInit, static_cast<uint64_t>(i), 0));
    ens.x[i] = sample_rho_in(rng);
    if (boundary_distance(dom, ens.x[i]) < 0.0)
      throw ConfigError("init_ensemble: rho_in sample outside the domain");
    ens.v[i] = sample_equilibrium<D>(eq, rng);
  }
  return ens;
}

namespace detail {

/// Transport + collision for one particle over kinetic duration tau.
/// Sub-steps halve until the free-flight displacement resolves the geometry.
template <int D>
inline void advance_particle(Vec<D>& x, Vec<D>& v, uint8_t& alive,
                             const DomainShape& dom, Boundary bc, double eps,
                             double s, double tau, double dtau_max, RngStream& rng) {
  const double diam =
      (dom.kind == DomainShape::Kind::UnitBall) ? 2.0 : std::numeric_limits<double>::infinity();
  double remaining = tau;
  while (remaining > 0.0 && alive) {
    double dsub = std::min(remaining, dtau_max);
    int halvings = 0;
    while (eps * norm(v) * dsub > 0.25 * diam) {
      dsub *= 0.5;
      if (++halvings > 60) throw StepTooLarge("advance_particle: sub-step underflow");
    }
    Vec<D> w = (eps * dsub) * v;
    double len = norm(w);
    if (len > 0.0 && dom.kind != DomainShape::Kind::WholeSpace) {
      if (bc == Boundary::Absorb) {
        Vec<D> u = (1.0 / len) * w;
        double hit = detail::hit_distance(dom, x, u);
        if (hit <= len) {
          x = x + hit * u;  // rests at the exit point
          alive = 0;
          return;
        }
        x = x + w;
      } else {
        TrajectoryOutcome<D> out;
        if (dom.kind == DomainShape::Kind::HalfSpace) {
          out = eta_halfspace(x, w);
        } else if constexpr (D == 1) {
          out = eta_interval(x, w);
        } else if constexpr (D == 2) {
          out = eta_disk(x, w);
        } else {
          out = trace_eta(dom, x, w);
        }
        x = out.endpoint;
        v = norm(v) * out.final_dir;  // speed unchanged by transport
      }
    } else {
      x = x + w;
    }
    v = ou_exact_step<D>(v, dsub, s, rng);
    remaining -= dsub;
  }
}

}  // namespace detail

/// One macroscopic step dt: kinetic duration tau = dt / eps^{2s}, Lie
/// splitting transport -> collision per sub-step. Deterministic for a given
/// (seed, step_index) regardless of worker count.
template <int D>
inline void step(ParticleEnsemble<D>& ens, double dt, const DomainShape& dom,
                 Boundary bc, int workers = 1,
                 double dtau_max = std::numeric_limits<double>::infinity()) {
  if (!(dt > 0.0)) throw ConfigError("step: need dt > 0");
  if (!(dtau_max > 0.0)) throw ConfigError("step: need dtau_max > 0");
  const double tau = dt / std::pow(ens.eps, 2.0 * ens.s);
  const long n = ens.size();
  auto work = [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      if (!ens.alive[i]) continue;
      RngStream rng(stream_key(ens.seed, detail::kPurposeStep,
                               static_cast<uint64_t>(i),
                               static_cast<uint64_t>(ens.step_index)));
      detail::advance_particle<D>(ens.x[i], ens.v[i], ens.alive[i], dom, bc,
                                  ens.eps, ens.s, tau, dtau_max, rng);
    }
  };
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    long chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      long lo = t * chunk, hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  ens.step_index += 1;
  ens.t += dt;
}

struct DensityField1 {
  Grid1D grid;
  std::vector<double> rho;
  double mass = 0.0;
};

struct DensityField2 {
  PolarGrid grid;
  std::vector<double> rho;
  double mass = 0.0;
};

/// Histogram density: sum over cells of rho * cell volume equals the alive
/// fraction captured by the grid.
inline DensityField1 density(const ParticleEnsemble<1>& ens, const Grid1D& g) {
  DensityField1 out;
  out.grid = g;
  out.rho.assign(g.n, 0.0);
  const double n = static_cast<double>(ens.size());
  for (long i = 0; i < ens.size(); ++i) {
    if (!ens.alive[i]) continue;
    long c = g.index_of(ens.x[i][0]);
    if (c >= 0) out.rho[c] += 1.0;
  }
  for (long c = 0; c < g.n; ++c) out.rho[c] /= n * g.h();
  out.mass = ens.mass();
  return out;
}

inline DensityField2 density(const ParticleEnsemble<2>& ens, const PolarGrid& g) {
  DensityField2 out;
  out.grid = g;
  out.rho.assign(g.size(), 0.0);
  const double n = static_cast<double>(ens.size());
  const double pi = 3.14159265358979323846;
  for (long i = 0; i < ens.size(); ++i) {
    if (!ens.alive[i]) continue;
    double r = norm(ens.x[i]);
    double t = std::atan2(ens.x[i][1], ens.x[i][0]);
    if (t < 0.0) t += 2.0 * pi;
    long ir = std::min<long>(g.n_r - 1, static_cast<long>(r / g.dr()));
    long it = std::min<long>(g.n_t - 1, static_cast<long>(t / g.dt()));
    out.rho[g.index(ir, it)] += 1.0;
  }
  for (long ir = 0; ir < g.n_r; ++ir)
    for (long it = 0; it < g.n_t; ++it)
      out.rho[g.index(ir, it)] /= n * g.area(ir);
  out.mass = ens.mass();
  return out;
}

/// Histogram proxy of the weighted norm  iint (f^eps)^2 / F(v) dx dv  on a
/// truncated phase-space window (1-D spatial ensembles).
inline double weighted_l2(const ParticleEnsemble<1>& ens, const Grid1D& xg,
                          const Grid1D& vg) {
  if (ens.alive_count() < 1000) throw TooFewSamples("weighted_l2: too few alive");
  const EquilibriumDensity& F = equilibrium_density(ens.s, 1);
  std::vector<double> h(static_cast<size_t>(xg.n) * vg.n, 0.0);
  const double n = static_cast<double>(ens.size());
  for (long i = 0; i < ens.size(); ++i) {
    if (!ens.alive[i]) continue;
    long cx = xg.index_of(ens.x[i][0]);
    long cv = vg.index_of(ens.v[i][0]);
    if (cx >= 0 && cv >= 0) h[cx * vg.n + cv] += 1.0;
  }
  double cell = xg.h() * vg.h();
  double acc = 0.0;
  for (long cx = 0; cx < xg.n; ++cx)
    for (long cv = 0; cv < vg.n; ++cv) {
      double f = h[cx * vg.n + cv] / (n * cell);
      acc += f * f / F(vg.center(cv)) * cell;
    }
  return acc;
}

struct LimitStudyRow {
  double eps = 0.0;
  double l2_error = 0.0;
  double mc_stderr = 0.0;
};

struct LimitStudyConfig {
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
  double T = 0.5;
  double dt = 1e-3;
  long n = 200000;
  double s = 0.5;
  uint64_t seed = 20240901;
  int workers = 1;
  long cmp_cells = 16;       ///< comparison-grid cells (half-line window [0,6])
  double cmp_window = 6.0;
};

namespace detail {

/// Batch-wise spread of the density error, used as a Monte Carlo noise scale.
inline double batch_stderr(const std::vector<double>& errs) {
  if (errs.size() < 2) return 0.0;
  double m = 0.0;
  for (double e : errs) m += e;
  m /= static_cast<double>(errs.size());
  double v = 0.0;
  for (double e : errs) v += (e - m) * (e - m);
  v /= static_cast<double>(errs.size() - 1);
  return std::sqrt(v / static_cast<double>(errs.size()));
}

}  // namespace detail

/// Half-line specular limit study: particle densities at T against the
/// cosine-spectral reference of the limiting specular heat equation, on a
/// fixed comparison window. Common random numbers across the eps ladder.
inline std::vector<LimitStudyRow> limit_study_halfline(const LimitStudyConfig& cfg) {
  auto dom = DomainShape::half_space(1);
  auto bump = [](double x) {
    double z = (x - 1.5) / 0.5;
    return std::exp(-z * z);
  };
  // Normalize rho_in to unit mass for direct comparison with the histogram.
  double mass_in = 0.0;
  for (long i = 0; i < 20000; ++i) mass_in += bump((i + 0.5) * 1e-3) * 1e-3;
  CosineReference ref([&](double x) { return bump(x) / mass_in; }, 48.0, cfg.s,
                      4096, 16384);
  auto sampler = [&](RngStream& rng) -> Vec1 {
    for (;;) {  // rejection sampling under the bump on [0, 8]
      double x = rng.uniform(0.0, 8.0);
      if (rng.uniform() < bump(x)) return Vec1{{x}};
    }
  };
  Grid1D cmp(0.0, cfg.cmp_window, cfg.cmp_cells);
  // Cell averages of the reference, to match the histogram estimator.
  std::vector<double> refc(cmp.n, 0.0);
  for (long c = 0; c < cmp.n; ++c) {
    for (int q = 0; q < 8; ++q)
      refc[c] += ref.eval(cfg.T, cmp.a + (c + (q + 0.5) / 8.0) * cmp.h());
    refc[c] /= 8.0;
  }
  long nsteps = static_cast<long>(std::llround(cfg.T / cfg.dt));
  std::vector<LimitStudyRow> rows;
  for (double eps : cfg.eps_list) {
    auto ens = init_ensemble<1>(cfg.n, sampler, dom, cfg.s, eps, cfg.seed);
    for (long k = 0; k < nsteps; ++k)
      step<1>(ens, cfg.dt, dom, Boundary::Specular, cfg.workers);
    auto rho = density(ens, cmp);
    double num = 0.0;
    for (long c = 0; c < cmp.n; ++c) {
      double d = rho.rho[c] - refc[c];
      num += d * d * cmp.h();
    }
    LimitStudyRow row;
    row.eps = eps;
    row.l2_error = std::sqrt(num);
    // Noise scale from 8 particle batches.
    const int B = 8;
    std::vector<double> be;
    long bs = cfg.n / B;
    for (int b = 0; b < B; ++b) {
      std::vector<double> h(cmp.n, 0.0);
      for (long i = b * bs; i < (b + 1) * bs; ++i)
        if (ens.alive[i]) {
          long c = cmp.index_of(ens.x[i][0]);
          if (c >= 0) h[c] += 1.0;
        }
      double e = 0.0;
      for (long c = 0; c < cmp.n; ++c) {
        double d = h[c] / (static_cast<double>(bs) * cmp.h()) - refc[c];
        e += d * d * cmp.h();
      }
      be.push_back(std::sqrt(e));
    }
    row.mc_stderr = detail::batch_stderr(be);
    rows.push_back(row);
  }
  return rows;
}

/// Disk absorbing limit study: particle densities at T against the dense
/// exterior-Dirichlet solver on the comparison polar grid.
inline std::vector<LimitStudyRow> limit_study_disk(const LimitStudyConfig& cfg) {
  auto dom = DomainShape::unit_ball(2);
  auto bump = [](const Vec2& y) {
    return std::exp(-8.0 * norm2(y - Vec2{{0.3, 0.0}}));
  };
  PolarGrid cmp(8, 12);
  // Macro route: dense Dirichlet solve from the normalized bump.
  HeatProblem p;
  p.domain = dom;
  p.bc = BcKind::DirichletExterior;
  p.s = cfg.s;
  p.T = cfg.T;
  p.dt = cfg.dt;
  p.grid2 = cmp;
  auto opm = assemble_operator(p);
  Eigen::VectorXd u0(cmp.size());
  for (long i = 0; i < cmp.n_r; ++i)
    for (long j = 0; j < cmp.n_t; ++j)
      u0(cmp.index(i, j)) = bump(cmp.center(i, j));
  u0 /= opm.vol.dot(u0);  // unit initial mass
  auto sol = solve(p, opm, u0);
  const Eigen::VectorXd& uT = sol.snapshots.back();
  auto sampler = [&](RngStream& rng) -> Vec2 {
    for (;;) {
      Vec2 y{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
      if (norm2(y) < 1.0 && rng.uniform() < bump(y)) return y;
    }
  };
  long nsteps = static_cast<long>(std::llround(cfg.T / cfg.dt));
  std::vector<LimitStudyRow> rows;
  for (double eps : cfg.eps_list) {
    auto ens = init_ensemble<2>(cfg.n, sampler, dom, cfg.s, eps, cfg.seed);
    for (long k = 0; k < nsteps; ++k)
      step<2>(ens, cfg.dt, dom, Boundary::Absorb, cfg.workers);
    auto rho = density(ens, cmp);
    double num = 0.0;
    for (long m = 0; m < cmp.size(); ++m) {
      double d = rho.rho[m] - uT(m);
      num += d * d * opm.vol(m);
    }
    LimitStudyRow row;
    row.eps = eps;
    row.l2_error = std::sqrt(num);
    const int B = 8;
    std::vector<double> be;
    long bs = cfg.n / B;
    for (int b = 0; b < B; ++b) {
      std::vector<double> h(cmp.size(), 0.0);
      for (long i = b * bs; i < (b + 1) * bs; ++i)
        if (ens.alive[i]) {
          double r = norm(ens.x[i]);
          double t = std::atan2(ens.x[i][1], ens.x[i][0]);
          if (t < 0.0) t += 2.0 * 3.14159265358979323846;
          long ir = std::min<long>(cmp.n_r - 1, static_cast<long>(r / cmp.dr()));
          long it = std::min<long>(cmp.n_t - 1, static_cast<long>(t / cmp.dt()));
          h[cmp.index(ir, it)] += 1.0;
        }
      double e = 0.0;
      for (long m = 0; m < cmp.size(); ++m) {
        long ir = m / cmp.n_t;
        double d = h[m] / (static_cast<double>(bs) * cmp.area(ir)) - uT(m);
        e += d * d * opm.vol(m);
      }
      be.push_back(std::sqrt(e));
    }
    row.mc_stderr = detail::batch_stderr(be);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace specdiff
