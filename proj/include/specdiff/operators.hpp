#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "specdiff/errors.hpp"
#include "specdiff/geometry.hpp"
#include "specdiff/grid.hpp"
#include "specdiff/stable.hpp"
#include "specdiff/vec.hpp"

namespace specdiff {

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

// 12-point Gauss-Legendre rule on [-1, 1] (positive half; mirrored in use).
inline constexpr double kGl12x[6] = {0.1252334085114689, 0.3678314989981802,
                                     0.5873179542866175, 0.7699026741943047,
                                     0.9041172563704749, 0.9815606342467192};
inline constexpr double kGl12w[6] = {0.2491470458134028, 0.2334925365383548,
                                     0.2031674267230659, 0.1600783285433462,
                                     0.1069393259953184, 0.0471753363865118};

/// Surface measure of the unit sphere S^{d-1}.
inline double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: throw ConfigError("sphere_area: dim must be 1, 2 or 3");
  }
}

/// Composite Gauss-Legendre sum of f over [a, b] with panels of width <= wmax.
template <class F>
inline double gl_integrate(const F& f, double a, double b, double wmax) {
  long npan = std::max<long>(1, static_cast<long>(std::ceil((b - a) / wmax)));
  double w = (b - a) / static_cast<double>(npan);
  double acc = 0.0;
  for (long p = 0; p < npan; ++p) {
    double c = a + (static_cast<double>(p) + 0.5) * w, hw = 0.5 * w;
    for (int q = 0; q < 6; ++q) {
      acc += hw * kGl12w[q] * (f(c - hw * kGl12x[q]) + f(c + hw * kGl12x[q]));
    }
  }
  return acc;
}

}  // namespace detail

/// Closed form of the fractional-Laplacian normalization constant,
/// 4^s Gamma(d/2+s) s / (pi^{d/2} Gamma(1-s)).
inline double normalization_constant_closed_form(int d, double s) {
  if (d < 1 || d > 3 || !(s > 0.0 && s < 1.0))
    throw ConfigError("normalization_constant: need d in {1,2,3}, s in (0,1)");
  return std::pow(4.0, s) * std::tgamma(0.5 * d + s) * s /
         (std::pow(detail::kPi, 0.5 * d) * std::tgamma(1.0 - s));
}

namespace detail {

/// I(d,s) = int (1 - cos z_1)/|z|^{d+2s} dz, reduced to a radial integral and
/// split as [0,1] (alternating series) + [1,R] (panel quadrature) + analytic
/// tail with one integration by parts on the oscillatory part.
inline double norm_integral(int d, double s, double R) {
  // [0,1]: angular average of 1 - cos(r mu) expands in even powers of r;
  // coefficient of r^{2k} is a_k, integral over [0,1] of r^{2k-1-2s} is
  // 1/(2k-2s).
  double series = 0.0;
  double fact = 1.0;  // running (2k)! style denominators per dimension
  for (int k = 1; k <= 40; ++k) {
    double ak;
    if (d == 1) {
      fact = (k == 1) ? 2.0 : fact * (2.0 * k) * (2.0 * k - 1.0);  // (2k)!
      ak = 1.0 / fact;
    } else if (d == 2) {
      // 1 - J0(r): coefficient (1/4^k)/(k!)^2.
      fact = (k == 1) ? 1.0 : fact * static_cast<double>(k);  // k!
      ak = 1.0 / (std::pow(4.0, k) * fact * fact);
    } else {
      fact = (k == 1) ? 6.0 : fact * (2.0 * k) * (2.0 * k + 1.0);  // (2k+1)!
      ak = 1.0 / fact;
    }
    double term = ((k % 2 == 1) ? 1.0 : -1.0) * ak / (2.0 * k - 2.0 * s);
    series += term;
    if (std::fabs(term) < 1e-18) break;
  }
  auto profile = [&](double r) -> double {
    if (d == 1) return 1.0 - std::cos(r);
    if (d == 2) return 1.0 - std::cyl_bessel_j(0.0, r);
    return 1.0 - std::sin(r) / r;
  };
  double mid = gl_integrate(
      [&](double r) { return profile(r) * std::pow(r, -1.0 - 2.0 * s); }, 1.0,
      R, 0.25);
  double tail = std::pow(R, -2.0 * s) / (2.0 * s);
  if (d == 1) {
    tail += std::sin(R) * std::pow(R, -1.0 - 2.0 * s) -
            (1.0 + 2.0 * s) * std::cos(R) * std::pow(R, -2.0 - 2.0 * s);
  } else if (d == 2) {
    tail += std::sqrt(2.0 / kPi) * std::sin(R - 0.25 * kPi) *
            std::pow(R, -1.5 - 2.0 * s);
  } else {
    tail -= std::cos(R) * std::pow(R, -2.0 - 2.0 * s);
  }
  return sphere_area(d) * (series + mid + tail);
}

}  // namespace detail

/// Normalization constant by independent singular-integral quadrature, with a
/// two-resolution consistency check; agrees with the closed form to ~1e-7.
inline double normalization_constant(int d, double s) {
  if (d < 1 || d > 3 || !(s > 0.0 && s < 1.0))
    throw ConfigError("normalization_constant: need d in {1,2,3}, s in (0,1)");
  double i1 = detail::norm_integral(d, s, 600.0);
  double i2 = detail::norm_integral(d, s, 1200.0);
  if (std::fabs(i1 - i2) > 1e-6 * std::fabs(i2))
    throw QuadratureNotConverged("normalization_constant: resolutions disagree");
  return 1.0 / i2;
}

struct OperatorConfig {
  double s = 0.5;
  double delta = 0.05;      ///< inner principal-value ball radius
  double R_trunc = 40.0;    ///< outer truncation radius of the w-integral
  int n_radial = 256;       ///< total log-radial quadrature nodes
  int n_angular = 64;       ///< directions on S^{d-1} (d=3: product rule)
  double c_ds = 0.0;        ///< normalization constant; 0 = fill from closed form
  double fd_h = 1e-4;       ///< FD step for the inner Taylor correction
  double neumann_tol = 1e-5;
  // x-space quadrature used by the bilinear forms.
  int n_x = 24;
  double x_window = 8.0;

  void validate() const {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("OperatorConfig: s in (0,1)");
    if (!(delta > 0.0 && delta < R_trunc))
      throw ConfigError("OperatorConfig: need 0 < delta < R_trunc");
    if (n_radial < 12 || n_angular < 2)
      throw ConfigError("OperatorConfig: quadrature resolution too small");
    if (c_ds < 0.0) throw ConfigError("OperatorConfig: c_ds must be >= 0");
  }
  double constant(int d) const {
    return c_ds > 0.0 ? c_ds : normalization_constant_closed_form(d, s);
  }
};

namespace detail {

/// Antipodally complete direction set with weights summing to |S^{d-1}|.
/// Plain sums over such a set equal the symmetrized principal-value sums.
template <int D>
struct DirectionSet {
  std::vector<Vec<D>> u;
  std::vector<double> w;
};

template <int D>
inline DirectionSet<D> make_directions(int n_angular) {
  DirectionSet<D> ds;
  if constexpr (D == 1) {
    ds.u = {Vec1{{1.0}}, Vec1{{-1.0}}};
    ds.w = {1.0, 1.0};
  } else if constexpr (D == 2) {
    int n = n_angular + (n_angular % 2);
    for (int j = 0; j < n; ++j) {
      double t = 2.0 * kPi * (j + 0.5) / n;
      ds.u.push_back(Vec2{{std::cos(t), std::sin(t)}});
      ds.w.push_back(2.0 * kPi / n);
    }
  } else {
    // Product rule: 12-point Gauss-Legendre in the polar cosine (symmetric
    // about 0) times a uniform even azimuthal grid; antipodally complete.
    int n_az = std::max(4, n_angular / 6);
    n_az += n_az % 2;
    for (int q = 0; q < 12; ++q) {
      double mu = (q < 6) ? -kGl12x[q] : kGl12x[q - 6];
      double gw = (q < 6) ? kGl12w[q] : kGl12w[q - 6];
      double rho = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      for (int j = 0; j < n_az; ++j) {
        double ph = 2.0 * kPi * (j + 0.5) / n_az;
        ds.u.push_back(Vec<D>{{rho * std::cos(ph), rho * std::sin(ph), mu}});
        ds.w.push_back(gw * 2.0 * kPi / n_az);
      }
    }
  }
  return ds;
}

/// Log-radial quadrature for int_{r0}^{R} g(r) r^{-1-2s} dr: nodes r_i and
/// weights w_i with sum_i w_i g(r_i) approximating the integral.
struct RadialRig {
  std::vector<double> r, w;
};

inline RadialRig make_radial(double r0, double R, double s, int n_total) {
  RadialRig rig;
  double a = std::log(r0), b = std::log(R);
  long npan = std::max<long>(2, n_total / 12);
  double wp = (b - a) / static_cast<double>(npan);
  for (long p = 0; p < npan; ++p) {
    double c = a + (static_cast<double>(p) + 0.5) * wp, hw = 0.5 * wp;
    for (int q = 0; q < 12; ++q) {
      double t = (q < 6) ? c - hw * kGl12x[q] : c + hw * kGl12x[q - 6];
      double gw = (q < 6) ? kGl12w[q] : kGl12w[q - 6];
      rig.r.push_back(std::exp(t));
      rig.w.push_back(hw * gw * std::exp(-2.0 * s * t));
    }
  }
  return rig;
}

/// FD Laplacian of psi at x.
template <int D, class F>
inline double fd_laplacian(const F& psi, const Vec<D>& x, double h) {
  double p0 = psi(x), acc = 0.0;
  for (int i = 0; i < D; ++i) {
    Vec<D> xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    acc += (psi(xp) + psi(xm) - 2.0 * p0) / (h * h);
  }
  return acc;
}

template <int D, class F>
inline Vec<D> fd_gradient(const F& psi, const Vec<D>& x, double h) {
  Vec<D> g;
  for (int i = 0; i < D; ++i) {
    Vec<D> xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (psi(xp) - psi(xm)) / (2.0 * h);
  }
  return g;
}

/// Normal derivative check at boundary sample points; required for s >= 1/2.
template <int D, class F>
inline void check_neumann(const DomainShape& dom, const F& psi,
                          const Vec<D>& near_x, const OperatorConfig& cfg) {
  if (cfg.s < 0.5 || dom.kind == DomainShape::Kind::WholeSpace) return;
  double worst = 0.0, scale = 1.0;
  auto probe = [&](Vec<D> b) {
    Vec<D> n = outward_normal(dom, b);
    // Second-order one-sided difference along the inward normal, evaluated
    // at the boundary point itself.
    double h = cfg.fd_h;
    double p0 = psi(b), p1 = psi(b - h * n), p2 = psi(b - (2.0 * h) * n);
    double dn = -(-3.0 * p0 + 4.0 * p1 - p2) / (2.0 * h);
    worst = std::max(worst, std::fabs(dn));
    scale = std::max(scale, std::fabs(p0));
  };
  if (dom.kind == DomainShape::Kind::UnitBall) {
    if constexpr (D == 1) {
      probe(Vec<D>{{1.0}});
      probe(Vec<D>{{-1.0}});
    } else if constexpr (D == 2) {
      for (int j = 0; j < 16; ++j) {
        double t = 2.0 * kPi * j / 16.0;
        probe(Vec<D>{{std::cos(t), std::sin(t)}});
      }
    } else {
      auto ds = make_directions<D>(24);
      for (const auto& u : ds.u) probe(u);
    }
  } else {  // HalfSpace: sample the wall near the evaluation point.
    for (int j = -2; j <= 2; ++j) {
      Vec<D> b = near_x;
      b[D - 1] = 0.0;
      if constexpr (D >= 2) b[0] += static_cast<double>(j);
      probe(b);
      if constexpr (D == 1) break;
    }
  }
  if (worst > cfg.neumann_tol * scale)
    throw NeumannViolation("test function violates the Neumann condition");
}

}  // namespace detail

/// Specular fractional diffusion operator at a point:
/// c_{d,s} PV int (psi(x) - psi(eta(x,w))) / |w|^{d+2s} dw.
/// The inner ball |w| < r0 (r0 = min(delta, dist(x, boundary)/2)) uses the
/// second-order Taylor cancellation, valid because eta(x,w) = x + w there;
/// outside, log-radial panels and an antipodally complete direction set make
/// the plain sum equal to its principal-value symmetrization.
template <int D, class F>
inline double apply_specular_op(const DomainShape& dom, const F& psi,
                                const Vec<D>& x, const OperatorConfig& cfg) {
  cfg.validate();
  if (dom.dim != D) throw ConfigError("apply_specular_op: dimension mismatch");
  detail::check_neumann<D>(dom, psi, x, cfg);
  const double c = cfg.constant(D);
  const double s = cfg.s;
  double r0 = cfg.delta;
  if (dom.kind != DomainShape::Kind::WholeSpace) {
    double dist = boundary_distance(dom, x);
    if (dist < 1e-12) throw PointOnBoundary("apply_specular_op: x on boundary");
    r0 = std::min(r0, 0.5 * dist);
  }
  // Inner Taylor term: -(c/2) * lap(psi) * (|S^{d-1}|/d) * r0^{2-2s}/(2-2s).
  double lap = detail::fd_laplacian(psi, x, cfg.fd_h);
  double inner = -0.5 * c * lap * (detail::sphere_area(D) / D) *
                 std::pow(r0, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  auto dirs = detail::make_directions<D>(cfg.n_angular);
  auto rig = detail::make_radial(r0, cfg.R_trunc, s, cfg.n_radial);
  double p0 = psi(x);
  double outer = 0.0;
  const bool free_space = (dom.kind == DomainShape::Kind::WholeSpace);
  for (size_t j = 0; j < dirs.u.size(); ++j) {
    double acc = 0.0;
    for (size_t i = 0; i < rig.r.size(); ++i) {
      Vec<D> w = rig.r[i] * dirs.u[j];
      Vec<D> y = free_space ? x + w : eta_point(dom, x, w);
      acc += rig.w[i] * (p0 - psi(y));
    }
    outer += dirs.w[j] * acc;
  }
  return inner + c * outer;
}

/// Fractional Laplacian: the whole-space case of the specular operator.
template <int D, class F>
inline double apply_frac_laplacian(const F& psi, const Vec<D>& x,
                                   const OperatorConfig& cfg) {
  return apply_specular_op(DomainShape::whole_space(D), psi, x, cfg);
}

/// Two-point half-space kernel: direct summand plus mirror-charge summand.
template <int D>
inline double kernel_halfspace(const Vec<D>& x, const Vec<D>& y,
                               const OperatorConfig& cfg) {
  Vec<D> d = x - y;
  double rd = norm(d);
  if (rd < 1e-14) throw CoincidentPoints("kernel_halfspace: x == y");
  Vec<D> m = d;
  m[D - 1] = x[D - 1] + y[D - 1];
  double c = cfg.constant(D), p = D + 2.0 * cfg.s;
  return c * (std::pow(rd, -p) + std::pow(norm(m), -p));
}

namespace detail {

/// x-space quadrature cells covering the domain window.
template <int D>
struct XCells {
  std::vector<Vec<D>> x;
  std::vector<double> vol;
};

template <int D>
inline XCells<D> make_xcells(const DomainShape& dom, const OperatorConfig& cfg) {
  XCells<D> c;
  if (dom.kind == DomainShape::Kind::UnitBall) {
    if constexpr (D == 1) {
      Grid1D g(-1.0, 1.0, 4L * cfg.n_x);
      for (long i = 0; i < g.n; ++i) {
        c.x.push_back(Vec<D>{{g.center(i)}});
        c.vol.push_back(g.h());
      }
    } else if constexpr (D == 2) {
      PolarGrid g(cfg.n_x, 2L * cfg.n_x);
      for (long i = 0; i < g.n_r; ++i)
        for (long j = 0; j < g.n_t; ++j) {
          c.x.push_back(g.center(i, j));
          c.vol.push_back(g.area(i));
        }
    } else {
      throw ConfigError("bilinear_form: ball supported for d <= 2");
    }
  } else if (dom.kind == DomainShape::Kind::HalfSpace) {
    if constexpr (D == 1) {
      Grid1D g(0.0, cfg.x_window, 8L * cfg.n_x);
      for (long i = 0; i < g.n; ++i) {
        c.x.push_back(Vec<D>{{g.center(i)}});
        c.vol.push_back(g.h());
      }
    } else {
      throw ConfigError("bilinear_form: half-space supported for d = 1");
    }
  } else {
    throw ConfigError("bilinear_form: whole space window not supported");
  }
  return c;
}

}  // namespace detail

/// Symmetric Dirichlet form
///   (c/2) iint (phi(x)-phi(eta(x,w)))(psi(x)-psi(eta(x,w))) |w|^{-d-2s} dw dx
/// over the domain window, with the inner-ball gradient correction. Exactly
/// symmetric in (phi, psi); vanishes identically when either argument is
/// constant.
template <int D, class F1, class F2>
inline double bilinear_form(const DomainShape& dom, const F1& phi, const F2& psi,
                            const OperatorConfig& cfg) {
  cfg.validate();
  detail::check_neumann<D>(dom, phi, Vec<D>{}, cfg);
  detail::check_neumann<D>(dom, psi, Vec<D>{}, cfg);
  const double c = cfg.constant(D), s = cfg.s;
  auto cells = detail::make_xcells<D>(dom, cfg);
  auto dirs = detail::make_directions<D>(cfg.n_angular);
  double total = 0.0;
  for (size_t m = 0; m < cells.x.size(); ++m) {
    const Vec<D>& x = cells.x[m];
    double dist = boundary_distance(dom, x);
    double r0 = std::min(cfg.delta, 0.5 * dist);
    auto rig = detail::make_radial(r0, cfg.R_trunc, s, cfg.n_radial);
    double f0 = phi(x), p0 = psi(x);
    double acc = 0.0;
    for (size_t j = 0; j < dirs.u.size(); ++j) {
      double rad = 0.0;
      for (size_t i = 0; i < rig.r.size(); ++i) {
        Vec<D> y = eta_point(dom, x, rig.r[i] * dirs.u[j]);
        rad += rig.w[i] * ((f0 - phi(y)) * (p0 - psi(y)));
      }
      acc += dirs.w[j] * rad;
    }
    // Inner ball: (w.grad phi)(w.grad psi) integrates to
    // (grad phi . grad psi) (|S|/d) r0^{2-2s}/(2-2s).
    double gg = dot(detail::fd_gradient(phi, x, cfg.fd_h),
                    detail::fd_gradient(psi, x, cfg.fd_h));
    acc += gg * (detail::sphere_area(D) / D) * std::pow(r0, 2.0 - 2.0 * s) /
           (2.0 - 2.0 * s);
    total += cells.vol[m] * acc;
  }
  return 0.5 * c * total;
}

template <int D, class F>
inline double sr_seminorm(const DomainShape& dom, const F& psi,
                          const OperatorConfig& cfg) {
  return bilinear_form<D>(dom, psi, psi, cfg);
}

/// Integral of phi * Op(psi) over the domain window on the same x-cells as
/// bilinear_form; used for the integration-by-parts residual check.
template <int D, class F1, class F2>
inline double pairing_against_op(const DomainShape& dom, const F1& phi,
                                 const F2& psi, const OperatorConfig& cfg) {
  auto cells = detail::make_xcells<D>(dom, cfg);
  double total = 0.0;
  for (size_t m = 0; m < cells.x.size(); ++m)
    total += cells.vol[m] * phi(cells.x[m]) *
             apply_specular_op<D>(dom, psi, cells.x[m], cfg);
  return total;
}

struct DissipationResult {
  double g_form = 0.0;     ///< equilibrium-quotient (Dirichlet) form; 0 iff f = cF
  double literal = 0.0;    ///< plain difference form weighted by 1/F(v)
  double ratio = 0.0;      ///< g_form / literal
  double distance = 0.0;   ///< int |f - rho F|^2 / F over the lattice
  double rho = 0.0;        ///< window-normalized mass of f
};

/// Kinetic dissipation of a 1-D velocity density on its lattice. The g-form
///   (c/2) sum_{i != j} (f_i/F_i - f_j/F_j)^2 (F_i+F_j)/2 |v_i-v_j|^{-1-2s} h^2
/// is symmetric, non-negative, and vanishes exactly on multiples of the
/// equilibrium F. The literal difference form sum (f_i-f_j)^2 / (F_i |...|)
/// is recorded alongside for comparison; it does not annihilate F.
inline DissipationResult dissipation(const GridFunction& f, double s) {
  const long n = f.grid.n;
  if (n < 4) throw TooFewSamples("dissipation: lattice too small");
  for (double v : f.values)
    if (v < 0.0) throw NegativeDensity("dissipation: negative density value");
  const EquilibriumDensity& F = equilibrium_density(s, 1);
  const double h = f.grid.h();
  std::vector<double> Fv(n), g(n);
  double mf = 0.0, mF = 0.0;
  for (long i = 0; i < n; ++i) {
    Fv[i] = F(f.grid.center(i));
    g[i] = f.values[i] / Fv[i];
    mf += f.values[i];
    mF += Fv[i];
  }
  DissipationResult out;
  out.rho = mf / mF;
  const double c = normalization_constant_closed_form(1, s);
  double gf = 0.0, lit = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      double k = std::pow(h * static_cast<double>(j - i), -1.0 - 2.0 * s);
      double dg = g[i] - g[j];
      gf += dg * dg * 0.5 * (Fv[i] + Fv[j]) * k;
      double df = f.values[i] - f.values[j];
      lit += df * df * (1.0 / Fv[i] + 1.0 / Fv[j]) * 0.5 * k;
    }
  out.g_form = c * gf * h * h;  // off-diagonal pairs counted once = sum/2
  out.literal = 2.0 * lit * h * h;
  out.ratio = out.literal > 0.0 ? out.g_form / out.literal : 0.0;
  double dist = 0.0;
  for (long i = 0; i < n; ++i) {
    double r = f.values[i] - out.rho * Fv[i];
    dist += r * r / Fv[i];
  }
  out.distance = dist * h;
  return out;
}

}  // namespace specdiff
