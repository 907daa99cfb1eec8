#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "specdiff/errors.hpp"
#include "specdiff/geometry.hpp"
#include "specdiff/grid.hpp"
#include "specdiff/operators.hpp"

namespace specdiff {

enum class BcKind { DirichletExterior, Specular };

/// Limiting macroscopic heat problem: d/dt u + A u = 0 with A a dense
/// discretization of the fractional (specular or exterior-Dirichlet)
/// diffusion operator.
struct HeatProblem {
  DomainShape domain = DomainShape::half_space(1);
  BcKind bc = BcKind::Specular;
  double s = 0.5;
  double T = 0.5;
  double dt = 1e-3;
  OperatorConfig cfg;
  Grid1D grid1;       ///< used when domain is the half-line
  PolarGrid grid2;    ///< used when domain is the unit disk

  void validate() const {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("HeatProblem: s in (0,1)");
    if (!(T > 0.0) || !(dt > 0.0) || dt > T)
      throw ConfigError("HeatProblem: need 0 < dt <= T");
  }
};

struct AssembledOperator {
  Eigen::MatrixXd A;          ///< generator: du/dt = -A u
  Eigen::VectorXd vol;        ///< cell volumes W
  double raw_symmetry = 0.0;  ///< pre-symmetrization residual (disk specular)
};

namespace detail {

/// Half-line specular operator on a cell-centered grid: pointwise two-point
/// kernel (direct + mirror summand) for well-separated cells, and a
/// second-difference Taylor closure for the near-diagonal band |y-x| < 3h/2.
/// Built in exact difference form: symmetric, rows sum to zero.
inline Eigen::MatrixXd assemble_halfline_specular(const Grid1D& g, double s) {
  const long n = g.n;
  const double h = g.h();
  const double c = normalization_constant_closed_form(1, s);
  const double p = 1.0 + 2.0 * s;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  auto couple = [&](long i, long j, double w) {
    A(i, j) -= w;
    A(j, i) -= w;
    A(i, i) += w;
    A(j, j) += w;
  };
  for (long i = 0; i < n; ++i) {
    double xi = g.center(i);
    for (long j = i + 1; j < n; ++j) {
      double xj = g.center(j);
      double w = c * std::pow(xi + xj, -p);          // mirror summand
      if (j - i >= 2) w += c * std::pow(xj - xi, -p);  // direct summand
      couple(i, j, h * w);
    }
  }
  // Near-diagonal direct part: -(u'' ) * c * (3h/2)^{2-2s}/(2-2s) with the
  // standard second difference; even ghost at the wall reflects row 0.
  double ct = c * std::pow(1.5 * h, 2.0 - 2.0 * s) / ((2.0 - 2.0 * s) * h * h);
  for (long i = 0; i + 1 < n; ++i) couple(i, i + 1, ct);
  return A;
}

/// Bilinear interpolation weights of a point y (|y| <= 1) onto polar cell
/// centers; weights are nonnegative and sum to one.
inline void polar_interp(const PolarGrid& g, const Vec2& y,
                         long idx[4], double wt[4]) {
  const double pi = 3.14159265358979323846;
  double r = norm(y);
  double t = std::atan2(y[1], y[0]);
  if (t < 0.0) t += 2.0 * pi;
  double rr = r / g.dr() - 0.5;
  long i0 = static_cast<long>(std::floor(rr));
  double fr = rr - static_cast<double>(i0);
  if (i0 < 0) { i0 = 0; fr = 0.0; }
  if (i0 >= g.n_r - 1) { i0 = g.n_r - 2; fr = 1.0; }
  double tt = t / g.dt() - 0.5;
  long j0 = static_cast<long>(std::floor(tt));
  double ft = tt - static_cast<double>(j0);
  long j0w = ((j0 % g.n_t) + g.n_t) % g.n_t;
  long j1w = (j0w + 1) % g.n_t;
  idx[0] = g.index(i0, j0w);
  idx[1] = g.index(i0, j1w);
  idx[2] = g.index(i0 + 1, j0w);
  idx[3] = g.index(i0 + 1, j1w);
  wt[0] = (1.0 - fr) * (1.0 - ft);
  wt[1] = (1.0 - fr) * ft;
  wt[2] = fr * (1.0 - ft);
  wt[3] = fr * ft;
}

/// Disk specular operator: row-wise quadrature of the trajectory-endpoint
/// integral with endpoint values spread back onto the lattice by
/// interpolation, then volume-weighted symmetrization with a conservative
/// diagonal reset. The result is exactly symmetric under W, rows sum to
/// zero, and off-diagonal entries are nonpositive (discrete Dirichlet form).
inline AssembledOperator assemble_disk_specular(const PolarGrid& g,
                                                const OperatorConfig& cfg) {
  const long n = g.size();
  const double c = cfg.constant(2);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd vol(n);
  auto dirs = make_directions<2>(cfg.n_angular);
  auto dom = DomainShape::unit_ball(2);
  for (long i = 0; i < g.n_r; ++i)
    for (long j = 0; j < g.n_t; ++j) {
      long m = g.index(i, j);
      vol(m) = g.area(i);
      Vec2 x = g.center(i, j);
      double r0 = std::min(cfg.delta, 0.5 * boundary_distance(dom, x));
      auto rig = make_radial(r0, cfg.R_trunc, cfg.s, cfg.n_radial);
      for (size_t q = 0; q < dirs.u.size(); ++q)
        for (size_t l = 0; l < rig.r.size(); ++l) {
          double w = c * dirs.w[q] * rig.w[l];
          Vec2 y = eta_point(dom, x, rig.r[l] * dirs.u[q]);
          long idx[4];
          double wt[4];
          polar_interp(g, y, idx, wt);
          A(m, m) += w;
          for (int q4 = 0; q4 < 4; ++q4) A(m, idx[q4]) -= w * wt[q4];
        }
    }
  Eigen::MatrixXd M = vol.asDiagonal() * A;
  AssembledOperator out;
  out.raw_symmetry = (M - M.transpose()).norm() / M.norm();
  Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  for (long m = 0; m < n; ++m) {
    double off = S.row(m).sum() - S(m, m);
    S(m, m) = -off;
  }
  out.A = vol.cwiseInverse().asDiagonal() * S;
  out.vol = vol;
  return out;
}

/// Disk exterior-Dirichlet operator: pointwise kernel between interior cells
/// plus the exact exterior-killing rate
///   kappa(x) = c int_0^{2pi} t(theta)^{-2s}/(2s) dtheta,
/// t(theta) the exit distance to the unit circle. Symmetric under W and
/// strictly positive definite.
inline AssembledOperator assemble_disk_dirichlet(const PolarGrid& g,
                                                 const OperatorConfig& cfg) {
  const long n = g.size();
  const double c = cfg.constant(2);
  const double p = 2.0 + 2.0 * cfg.s;
  const double pi = 3.14159265358979323846;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd vol(n);
  std::vector<Vec2> xs(n);
  for (long i = 0; i < g.n_r; ++i)
    for (long j = 0; j < g.n_t; ++j) {
      xs[g.index(i, j)] = g.center(i, j);
      vol(g.index(i, j)) = g.area(i);
    }
  for (long m = 0; m < n; ++m) {
    double diag = 0.0;
    for (long q = 0; q < n; ++q) {
      if (q == m) continue;
      double k = c * std::pow(norm(xs[m] - xs[q]), -p);
      A(m, q) = -vol(q) * k;
      diag += vol(q) * k;
    }
    // Exterior killing: angular quadrature of the exit-distance power.
    double kappa = 0.0;
    const int na = 256;
    for (int a = 0; a < na; ++a) {
      double th = 2.0 * pi * (a + 0.5) / na;
      Vec2 u{{std::cos(th), std::sin(th)}};
      double xu = dot(xs[m], u);
      double t = -xu + std::sqrt(std::max(0.0, xu * xu + 1.0 - norm2(xs[m])));
      kappa += std::pow(t, -2.0 * cfg.s);
    }
    kappa *= c * (2.0 * pi / na) / (2.0 * cfg.s);
    A(m, m) = diag + kappa;
  }
  AssembledOperator out;
  out.A = std::move(A);
  out.vol = std::move(vol);
  return out;
}

}  // namespace detail

inline AssembledOperator assemble_operator(const HeatProblem& p) {
  p.validate();
  if (p.domain.kind == DomainShape::Kind::HalfSpace && p.domain.dim == 1) {
    if (p.bc != BcKind::Specular)
      throw ConfigError("assemble_operator: half-line solver is specular only");
    AssembledOperator out;
    out.A = detail::assemble_halfline_specular(p.grid1, p.s);
    out.vol = Eigen::VectorXd::Constant(p.grid1.n, p.grid1.h());
    return out;
  }
  if (p.domain.kind == DomainShape::Kind::UnitBall && p.domain.dim == 2) {
    OperatorConfig cfg = p.cfg;
    cfg.s = p.s;
    return p.bc == BcKind::Specular ? detail::assemble_disk_specular(p.grid2, cfg)
                                    : detail::assemble_disk_dirichlet(p.grid2, cfg);
  }
  throw ConfigError("assemble_operator: unsupported domain");
}

struct HeatSolution {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> snapshots;
  std::vector<double> mass;    ///< sum W u per recorded time
  std::vector<double> energy;  ///< u^T W u per recorded time
};

/// Implicit Euler time stepping (I + dt A) u^{n+1} = u^n with one dense LU
/// factorization; records mass and L2 energy at every step.
inline HeatSolution solve(const HeatProblem& p, const AssembledOperator& op,
                          const Eigen::VectorXd& u0, long snapshot_every = 0) {
  p.validate();
  const long n = u0.size();
  if (op.A.rows() != n) throw ConfigError("solve: operator/initial size mismatch");
  long nsteps = static_cast<long>(std::llround(p.T / p.dt));
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) + p.dt * op.A;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  HeatSolution sol;
  Eigen::VectorXd u = u0;
  auto record = [&](double t, bool snap) {
    sol.times.push_back(t);
    sol.mass.push_back(op.vol.dot(u));
    sol.energy.push_back(u.dot(op.vol.cwiseProduct(u)));
    if (snap) sol.snapshots.push_back(u);
  };
  record(0.0, true);
  for (long k = 1; k <= nsteps; ++k) {
    u = lu.solve(u);
    bool snap = (snapshot_every > 0 && k % snapshot_every == 0) || k == nsteps;
    record(p.dt * static_cast<double>(k), snap);
  }
  return sol;
}

/// Independent reference for the half-line specular problem: cosine series on
/// [0, X] (the even mirror extension makes every cosine mode an eigenfunction
/// of the whole-line operator with eigenvalue (m pi / X)^{2s}).
struct CosineReference {
  double X = 0.0;
  std::vector<double> coeff;  ///< a_m at t = 0, m = 0..M
  double s = 0.5;

  template <class F>
  CosineReference(const F& rho_in, double X_, double s_, int modes = 2048,
                  long quad_n = 8192)
      : X(X_), coeff(modes + 1, 0.0), s(s_) {
    const double pi = 3.14159265358979323846;
    double h = X / static_cast<double>(quad_n);
    for (long i = 0; i < quad_n; ++i) {
      double x = (static_cast<double>(i) + 0.5) * h;
      double f = rho_in(x);
      coeff[0] += f * h / X;
      for (int m = 1; m <= modes; ++m)
        coeff[m] += 2.0 * f * std::cos(m * pi * x / X) * h / X;
    }
  }

  double eval(double t, double x) const {
    const double pi = 3.14159265358979323846;
    double acc = coeff[0];
    for (size_t m = 1; m < coeff.size(); ++m) {
      double lam = std::pow(static_cast<double>(m) * pi / X, 2.0 * s);
      acc += coeff[m] * std::exp(-t * lam) * std::cos(m * pi * x / X);
    }
    return acc;
  }
};

}  // namespace specdiff
