#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "specdiff/errors.hpp"
#include "specdiff/vec.hpp"

namespace specdiff {

/// Chord-length floor below which the closed-form disk map falls back to the
/// ray tracer (derivatives blow up like 1/L^2 near grazing, and the closed
/// form loses precision first).
inline constexpr double kGrazingFloor = 1e-12;

/// Tolerance factor for detecting proximity to a fixed-reflection-count
/// region boundary: |l_end| or |L - l_end| < kRegionTol * max(1,|v|).
inline constexpr double kRegionTol = 1e-8;

/// Safety cap on reflections per trace.
inline constexpr long kMaxReflections = 100000000L;

struct DomainShape {
  enum class Kind { WholeSpace, HalfSpace, UnitBall };
  Kind kind = Kind::WholeSpace;
  int dim = 2;

  static DomainShape whole_space(int d) { return {Kind::WholeSpace, d}; }
  static DomainShape half_space(int d) { return {Kind::HalfSpace, d}; }
  static DomainShape unit_ball(int d) { return {Kind::UnitBall, d}; }
};

/// Outward unit normal at a boundary point. HalfSpace Omega = {x_d > 0} has
/// constant outward normal -e_d; the ball has n(x) = x on |x| = 1.
template <int D>
inline Vec<D> outward_normal(const DomainShape& dom, const Vec<D>& x) {
  Vec<D> n{};
  switch (dom.kind) {
    case DomainShape::Kind::HalfSpace:
      n[D - 1] = -1.0;
      return n;
    case DomainShape::Kind::UnitBall:
      return normalized(x);
    default:
      throw Error("outward_normal: whole space has no boundary");
  }
}

/// Signed distance of x to the boundary of Omega (positive inside).
template <int D>
inline double boundary_distance(const DomainShape& dom, const Vec<D>& x) {
  switch (dom.kind) {
    case DomainShape::Kind::WholeSpace:
      return std::numeric_limits<double>::infinity();
    case DomainShape::Kind::HalfSpace:
      return x[D - 1];
    case DomainShape::Kind::UnitBall:
      return 1.0 - norm(x);
  }
  return 0.0;
}

template <int D>
struct TrajectoryOutcome {
  Vec<D> endpoint{};
  long k = 0;             ///< reflection count
  double theta = 0.0;     ///< polar angle of first reflection point (disk, d=2)
  double A = 0.0;         ///< incidence angle in [0, pi/2)
  double L = 0.0;         ///< chord length between successive reflections (ball)
  double l_in = 0.0;      ///< distance from x to first reflection
  double l_end = 0.0;     ///< remaining length on the last chord (|v| when k=0)
  Vec<D> final_dir{};     ///< unit direction after the last reflection
};

namespace detail {

/// Distance from x along unit direction u to the first boundary hit, or +inf.
template <int D>
inline double hit_distance(const DomainShape& dom, const Vec<D>& x, const Vec<D>& u) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (dom.kind) {
    case DomainShape::Kind::WholeSpace:
      return inf;
    case DomainShape::Kind::HalfSpace: {
      if (u[D - 1] >= 0.0) return inf;
      return x[D - 1] / (-u[D - 1]);
    }
    case DomainShape::Kind::UnitBall: {
      // Positive root of |x + t u| = 1.
      double b = dot(x, u);
      double disc = b * b + 1.0 - norm2(x);
      if (disc < 0.0) disc = 0.0;
      return -b + std::sqrt(disc);
    }
  }
  return inf;
}

}  // namespace detail

/// Generic ray-tracing stepper: advance along straight segments of total
/// length |v|, reflecting specularly at the boundary. A segment ending exactly
/// on the boundary does not count as a reflection (tie-break: k excludes a
/// reflection at arclength |v|).
///
/// Serves as the independent oracle for every closed form in this module.
/// Optionally records the polyline vertices (start, each reflection point,
/// endpoint).
template <int D>
inline TrajectoryOutcome<D> trace_eta(const DomainShape& dom, Vec<D> x, const Vec<D>& v,
                                      std::vector<Vec<D>>* polyline = nullptr) {
  TrajectoryOutcome<D> out;
  double speed = norm(v);
  if (polyline) polyline->push_back(x);
  if (speed == 0.0) {
    out.endpoint = x;
    out.l_end = 0.0;
    return out;
  }
  Vec<D> u = (1.0 / speed) * v;
  double remaining = speed;

  while (true) {
    double t = detail::hit_distance(dom, x, u);
    if (!(t < remaining)) {
      out.endpoint = x + remaining * u;
      if (polyline) polyline->push_back(out.endpoint);
      break;
    }
    x += t * u;
    if (dom.kind == DomainShape::Kind::UnitBall) x = normalized(x);  // re-project, kills drift
    if (polyline) polyline->push_back(x);
    Vec<D> n = outward_normal(dom, x);
    if (out.k == 0) {
      out.l_in = t;
      double ca = dot(u, n);  // u exits through the boundary, so u.n >= 0
      if (ca > 1.0) ca = 1.0;
      if (ca < 0.0) ca = 0.0;
      out.A = std::acos(ca);
      if (dom.kind == DomainShape::Kind::UnitBall) {
        out.L = 2.0 * ca;
        if constexpr (D == 2) out.theta = std::atan2(x[1], x[0]);
      }
    }
    u -= (2.0 * dot(u, n)) * n;
    remaining -= t;
    ++out.k;
    if (out.k > kMaxReflections)
      throw ReflectionCapExceeded("trace_eta: reflection cap exceeded");
  }
  out.l_end = remaining;
  out.final_dir = u;
  if (out.k == 0) {
    out.final_dir = u;
    out.l_end = speed;
  }
  return out;
}

/// Closed-form half-space endpoint map: eta(x,v) = x+v if x_d+v_d >= 0, else
/// the last coordinate is flipped. At most one reflection; the tie
/// x_d+v_d = 0 counts as k = 0.
template <int D>
inline TrajectoryOutcome<D> eta_halfspace(const Vec<D>& x, const Vec<D>& v) {
  TrajectoryOutcome<D> out;
  double speed = norm(v);
  double e = x[D - 1] + v[D - 1];
  out.endpoint = x + v;
  if (speed > 0.0) out.final_dir = (1.0 / speed) * v;
  if (e >= 0.0) {
    out.k = 0;
    out.l_end = speed;
    return out;
  }
  out.endpoint[D - 1] = -e;
  out.k = 1;
  // v_d < 0 strictly here since x_d >= 0 and x_d + v_d < 0.
  out.l_in = x[D - 1] * speed / (-v[D - 1]);
  out.l_end = speed - out.l_in;
  out.L = 0.0;  // no chord structure in the half-space
  double ca = -v[D - 1] / speed;
  if (ca > 1.0) ca = 1.0;
  out.A = std::acos(ca);
  out.final_dir[D - 1] = -out.final_dir[D - 1];
  return out;
}

/// Full chord data for a disk trajectory through x with unit direction u.
/// A_signed is the signed incidence angle (sin A_signed = x x u); the signed
/// convention makes the per-reflection rotation angle pi - 2A correct for
/// both orientations of travel around the disk.
struct DiskChords {
  double theta = 0.0;     ///< polar angle of first reflection point
  double A = 0.0;         ///< |A_signed|, in [0, pi/2]
  double A_signed = 0.0;
  double L = 0.0;         ///< chord length, 2 cos A
  double l_in = 0.0;      ///< distance from x to first reflection
  double sinA = 0.0;      ///< signed, = cross(x, u)
  double cosA = 0.0;      ///< = L/2 >= 0
};

inline DiskChords disk_chords(const Vec2& x, const Vec2& u) {
  DiskChords c;
  double xu = dot(x, u);
  double disc = xu * xu + 1.0 - norm2(x);
  if (disc < 0.0) disc = 0.0;
  c.cosA = std::sqrt(disc);
  c.L = 2.0 * c.cosA;
  c.sinA = cross(x, u);
  if (c.sinA > 1.0) c.sinA = 1.0;
  if (c.sinA < -1.0) c.sinA = -1.0;
  c.A_signed = std::asin(c.sinA);
  c.A = std::fabs(c.A_signed);
  c.l_in = c.cosA - xu;
  Vec2 z0 = x + c.l_in * u;
  c.theta = std::atan2(z0[1], z0[0]);
  return c;
}

/// (theta, A, L, l_in) of the chord through x with direction dir. The two
/// expressions for L (2 cos A and the discriminant form) coincide here by
/// construction; tests check them against the traced geometry.
inline DiskChords chord_quantities(const Vec2& x, const Vec2& dir) {
  return disk_chords(x, normalized(dir));
}

namespace detail {

/// Reflection count and last-chord length for total path length `speed`.
/// A trajectory ending exactly on the boundary keeps the smaller k.
inline void disk_count(double speed, double l_in, double L, long& k, double& l_end) {
  if (speed <= l_in || L <= 0.0) {
    k = 0;
    l_end = speed;
    return;
  }
  double rem = speed - l_in;
  double q = std::floor(rem / L);
  double r = rem - q * L;
  if (r == 0.0) {
    k = static_cast<long>(q);
    l_end = L;
  } else {
    k = static_cast<long>(q) + 1;
    l_end = r;
  }
}

}  // namespace detail

/// Closed-form disk endpoint map (d = 2),
///   eta(x,v) = k (z_{k-1} - z_k) + R_{k(pi-2A)} (x+v),
/// with z_j the reflection points at polar angles theta + j(pi-2A) and the
/// signed-A convention of DiskChords. Falls back to the ray tracer when the
/// chord length underflows (near-tangential ray).
inline TrajectoryOutcome<2> eta_disk(const Vec2& x, const Vec2& v) {
  TrajectoryOutcome<2> out;
  double speed = norm(v);
  if (speed == 0.0) {
    out.endpoint = x;
    return out;
  }
  Vec2 u = (1.0 / speed) * v;
  DiskChords c = disk_chords(x, u);

  long k = 0;
  double l_end = speed;
  detail::disk_count(speed, c.l_in, c.L, k, l_end);

  out.theta = c.theta;
  out.A = c.A;
  out.L = c.L;
  out.l_in = c.l_in;
  out.k = k;
  out.l_end = l_end;

  if (k == 0) {
    out.endpoint = x + v;
    out.final_dir = u;
    out.l_end = speed;
    return out;
  }
  if (c.L < kGrazingFloor) {
    // Closed form is unusable this close to grazing; trace instead.
    return trace_eta(DomainShape::unit_ball(2), x, v);
  }

  double phi = 3.14159265358979323846 - 2.0 * c.A_signed;  // per-reflection rotation
  double total = std::fmod(static_cast<double>(k) * phi, 6.28318530717958647692);
  Mat2 R = rotation(total);
  Vec2 z_prev{{std::cos(c.theta + (k - 1) * phi), std::sin(c.theta + (k - 1) * phi)}};
  Vec2 z_last{{std::cos(c.theta + k * phi), std::sin(c.theta + k * phi)}};
  out.endpoint = static_cast<double>(k) * (z_prev - z_last) + R * (x + v);
  out.final_dir = R * u;
  return out;
}

/// Closed-form interval map for the unit ball in d = 1, Omega = (-1,1):
/// folding of x+v by the period-4 triangle wave. O(1) for any |v|.
inline TrajectoryOutcome<1> eta_interval(const Vec1& x, const Vec1& v) {
  TrajectoryOutcome<1> out;
  double y = x[0] + v[0];
  // Reduce to the fundamental period [-1, 3) of the fold.
  double t = std::fmod(y + 1.0, 4.0);
  if (t < 0.0) t += 4.0;
  double folded;
  int leg;  // 0: ascending leg (direction preserved), 1: descending
  if (t <= 2.0) {
    folded = t - 1.0;
    leg = 0;
  } else {
    folded = 3.0 - t;
    leg = 1;
  }
  out.endpoint = Vec1{{folded}};
  double speed = std::fabs(v[0]);
  if (speed == 0.0) {
    out.l_end = 0.0;
    return out;
  }
  double dir = v[0] > 0.0 ? 1.0 : -1.0;
  out.final_dir = Vec1{{leg == 0 ? dir : -dir}};
  out.L = 2.0;
  out.l_in = dir > 0.0 ? 1.0 - x[0] : x[0] + 1.0;
  detail::disk_count(speed, out.l_in, 2.0, out.k, out.l_end);
  if (out.k == 0) {
    out.final_dir = Vec1{{dir}};
    out.l_end = speed;
  }
  return out;
}

template <int D>
struct PlaneReduction {
  Vec2 x2{}, v2{};
  Vec<D> e1{}, e2{};

  Vec<D> lift(const Vec2& p) const { return p[0] * e1 + p[1] * e2; }
};

/// Orthonormal basis of span{x, v} with x = (|x|, 0) in plane coordinates.
/// A ball trajectory stays in this plane, so d > 2 reduces to the disk.
template <int D>
inline PlaneReduction<D> plane_reduction(const Vec<D>& x, const Vec<D>& v) {
  PlaneReduction<D> pr;
  double nx = norm(x);
  if (nx > 0.0) {
    pr.e1 = (1.0 / nx) * x;
  } else if (norm(v) > 0.0) {
    pr.e1 = normalized(v);
  } else {
    pr.e1[0] = 1.0;
  }
  Vec<D> w = v - dot(v, pr.e1) * pr.e1;
  double nw = norm(w);
  if (nw > 1e-14 * (norm(v) + 1.0)) {
    pr.e2 = (1.0 / nw) * w;
  } else {
    // v parallel to x (or zero): any orthogonal completion works.
    int imin = 0;
    for (int i = 1; i < D; ++i)
      if (std::fabs(pr.e1[i]) < std::fabs(pr.e1[imin])) imin = i;
    Vec<D> a{};
    a[imin] = 1.0;
    Vec<D> b = a - dot(a, pr.e1) * pr.e1;
    pr.e2 = normalized(b);
  }
  pr.x2 = Vec2{{dot(x, pr.e1), dot(x, pr.e2)}};
  pr.v2 = Vec2{{dot(v, pr.e1), dot(v, pr.e2)}};
  return pr;
}

/// Closed-form endpoint of eta(x, v) for any supported domain/dimension.
/// Ball in d >= 3 goes through the planar reduction. This is the fast path
/// used by operator quadratures (O(1) in the reflection count).
template <int D>
inline Vec<D> eta_point(const DomainShape& dom, const Vec<D>& x, const Vec<D>& v) {
  switch (dom.kind) {
    case DomainShape::Kind::WholeSpace:
      return x + v;
    case DomainShape::Kind::HalfSpace:
      return eta_halfspace(x, v).endpoint;
    case DomainShape::Kind::UnitBall:
      if constexpr (D == 1) {
        return eta_interval(x, v).endpoint;
      } else if constexpr (D == 2) {
        return eta_disk(x, v).endpoint;
      } else {
        PlaneReduction<D> pr = plane_reduction(x, v);
        return pr.lift(eta_disk(pr.x2, pr.v2).endpoint);
      }
  }
  return x + v;
}

template <int D>
struct JacobianBundle {
  Mat<D> grad_v = Mat<D>::identity();
  Mat<D> grad_x = Mat<D>::identity();
  double det_v = 1.0;
  double mu = 0.0;
  Mat<D> rotation = Mat<D>::identity();
  long k = 0;
};

namespace detail {

inline void check_region_boundary(double speed, double L, double l_end, long k) {
  double tol = kRegionTol * std::max(1.0, speed);
  if (k >= 1 && (std::fabs(l_end) < tol || std::fabs(L - l_end) < tol))
    throw OnRegionBoundary("within tolerance of a reflection-count change");
}

}  // namespace detail

/// Analytic Jacobians of the disk map on the interior of a fixed-k region:
///   grad_v eta = mu Theta + R,   Theta = SRu (x) Su,
///   mu = (2kL/|v|) [2 l_in l_end / L^2 - (l_in + l_end)/L],
///   grad_x eta = 2k (2 l_end/L - 1) SRu (x) Su + R,
/// with R the rotation by k(pi - 2A) (signed A) and S the pi/2 rotation.
inline JacobianBundle<2> jacobian_disk(const Vec2& x, const Vec2& v) {
  JacobianBundle<2> jb;
  double speed = norm(v);
  if (speed == 0.0) return jb;
  Vec2 u = (1.0 / speed) * v;
  DiskChords c = disk_chords(x, u);
  long k;
  double l_end;
  detail::disk_count(speed, c.l_in, c.L, k, l_end);
  jb.k = k;
  if (k == 0) {
    // Near l_in = |v| the count is about to change; flag it.
    if (std::fabs(speed - c.l_in) < kRegionTol * std::max(1.0, speed))
      throw OnRegionBoundary("endpoint within tolerance of the boundary");
    return jb;
  }
  detail::check_region_boundary(speed, c.L, l_end, k);

  double phi = 3.14159265358979323846 - 2.0 * c.A_signed;
  double total = std::fmod(static_cast<double>(k) * phi, 6.28318530717958647692);
  Mat2 R = rotation(total);
  Vec2 su = perp(u);
  Vec2 b = perp(R * u);  // S R u
  double kk = static_cast<double>(k);

  jb.mu = (2.0 * kk * c.L / speed) *
          (2.0 * c.l_in * l_end / (c.L * c.L) - (c.l_in + l_end) / c.L);
  jb.rotation = R;
  jb.grad_v = jb.mu * outer(b, su) + R;
  jb.det_v = 1.0 + jb.mu;
  jb.grad_x = (2.0 * kk * (2.0 * l_end / c.L - 1.0)) * outer(b, su) + R;
  return jb;
}

/// Half-space Jacobians: identity, or identity with the last row negated when
/// the trajectory reflects (x_d + v_d < 0).
template <int D>
inline JacobianBundle<D> jacobian_halfspace(const Vec<D>& x, const Vec<D>& v) {
  JacobianBundle<D> jb;
  double e = x[D - 1] + v[D - 1];
  if (std::fabs(e) < kRegionTol * std::max(1.0, norm(v)))
    throw OnRegionBoundary("x_d + v_d within tolerance of 0");
  if (e > 0.0) return jb;
  jb.grad_v[D - 1][D - 1] = -1.0;
  jb.grad_x[D - 1][D - 1] = -1.0;
  jb.rotation[D - 1][D - 1] = -1.0;
  jb.det_v = -1.0;
  jb.mu = -2.0;  // det_v - 1, consistent with det = 1 + mu
  jb.k = 1;
  return jb;
}

template <int D>
struct ReverseMapResult {
  Vec<D> y{};
  Vec<D> w{};
  double mu1 = 1.0, mu2 = 1.0;
  long k = 0;
};

/// Measure-preserving reverse map F(x,v) = (eta(x,v), -[grad_v eta] v).
/// Tracing from (y,w) runs the same polyline backwards, so F is an
/// involution; det grad F = 1 with nontrivial eigenvalue pair
/// mu1,2 = 1 - 2k(k +- sqrt(k^2-1)) (product exactly 1).
template <int D>
inline ReverseMapResult<D> reverse_map(const DomainShape& dom, const Vec<D>& x,
                                       const Vec<D>& v) {
  ReverseMapResult<D> rm;
  if (dom.kind == DomainShape::Kind::UnitBall) {
    if constexpr (D == 2) {
      TrajectoryOutcome<2> tr = eta_disk(x, v);
      JacobianBundle<2> jb = jacobian_disk(x, v);
      rm.y = tr.endpoint;
      rm.w = -(jb.grad_v * v);
      rm.k = jb.k;
      if (jb.k >= 1) {
        double kk = static_cast<double>(jb.k);
        double root = std::sqrt(std::max(0.0, kk * kk - 1.0));
        rm.mu1 = 1.0 - 2.0 * kk * (kk + root);
        rm.mu2 = 1.0 - 2.0 * kk * (kk - root);
      }
      return rm;
    }
    throw Error("reverse_map: ball supported in d = 2 (use plane_reduction)");
  }
  if (dom.kind == DomainShape::Kind::HalfSpace) {
    TrajectoryOutcome<D> tr = eta_halfspace(x, v);
    JacobianBundle<D> jb = jacobian_halfspace(x, v);
    rm.y = tr.endpoint;
    rm.w = -(jb.grad_v * v);
    rm.k = jb.k;
    return rm;
  }
  rm.y = x + v;
  rm.w = -v;
  return rm;
}

/// Second derivative of the disk map in v: T[i][j] = grad_v of d(eta_i)/d(v_j).
struct D2Tensor {
  std::array<std::array<Vec2, 2>, 2> t{};

  Vec2& operator()(int i, int j) { return t[i][j]; }
  const Vec2& operator()(int i, int j) const { return t[i][j]; }

  double fro() const {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s += norm2(t[i][j]);
    return std::sqrt(s);
  }
};

/// Assembled second derivative,
///   grad_v x grad_v eta = (grad_v mu) x Theta + mu (grad_v x Theta)
///                         + (grad_v k(pi-2A)) x (S R),
/// built from the closed-form gradients of l_in, L, l_end and A. Valid on
/// the interior of a fixed-k region, k >= 1; zero tensor when k = 0.
inline D2Tensor second_derivative_disk(const Vec2& x, const Vec2& v) {
  D2Tensor T;
  double speed = norm(v);
  if (speed == 0.0) return T;
  Vec2 u = (1.0 / speed) * v;
  DiskChords c = disk_chords(x, u);
  long k;
  double l_end;
  detail::disk_count(speed, c.l_in, c.L, k, l_end);
  if (k == 0) {
    if (std::fabs(speed - c.l_in) < kRegionTol * std::max(1.0, speed))
      throw OnRegionBoundary("endpoint within tolerance of the boundary");
    return T;
  }
  detail::check_region_boundary(speed, c.L, l_end, k);
  if (c.L < kGrazingFloor) throw GrazingUnderflow("chord length underflow");

  double kk = static_cast<double>(k);
  double L = c.L, l_in = c.l_in, sA = c.sinA;
  double phi = 3.14159265358979323846 - 2.0 * c.A_signed;
  double total = std::fmod(kk * phi, 6.28318530717958647692);
  Mat2 R = rotation(total);
  Vec2 su = perp(u);
  Vec2 b = perp(R * u);   // S R u
  Vec2 Ru = R * u;
  Mat2 SR;                // S * R
  SR[0] = -R[1];
  SR[1] = R[0];

  // Scalar chord gradients in v (all along su except the u-part of l_end).
  Vec2 g_lin = (2.0 * l_in * sA / (speed * L)) * su;
  Vec2 g_L = (-2.0 * (L - 2.0 * l_in) * sA / (speed * L)) * su;
  Vec2 g_lend =
      u + (2.0 * sA / (L * speed)) * ((kk - 1.0) * (L - 2.0 * l_in) - l_in) * su;
  // Total rotation angle k(pi - 2A): gradient is -2k grad A.
  Vec2 g_ang = (-2.0 * kk * (L - 2.0 * l_in) / (speed * L)) * su;

  double g = 2.0 * l_in * l_end / L - (l_in + l_end);
  double mu = 2.0 * kk * g / speed;
  Vec2 g_g = (2.0 / L) * (l_end * g_lin + l_in * g_lend) -
             (2.0 * l_in * l_end / (L * L)) * g_L - g_lin - g_lend;
  Vec2 g_mu = 2.0 * kk * ((1.0 / speed) * g_g - (g / (speed * speed)) * u);

  // grad of b = SRu and of su (direction derivatives).
  double c_b = 2.0 * kk * (L - 2.0 * l_in) / (speed * L) - 1.0 / speed;

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec2 grad_b_i = (c_b * Ru[i]) * su;
      Vec2 grad_su_j = (-u[j] / speed) * su;
      T(i, j) = (b[i] * su[j]) * g_mu + mu * (su[j] * grad_b_i + b[i] * grad_su_j) +
                SR[i][j] * g_ang;
    }
  return T;
}

}  // namespace specdiff
