#pragma once

#include <cmath>
#include <vector>

#include "specdiff/errors.hpp"
#include "specdiff/vec.hpp"

namespace specdiff {

/// Uniform 1-D cell-centered lattice on [a, b].
struct Grid1D {
  double a = 0.0, b = 1.0;
  long n = 0;

  Grid1D() = default;
  Grid1D(double a_, double b_, long n_) : a(a_), b(b_), n(n_) {
    if (!(b > a) || n < 1) throw ConfigError("Grid1D: need b > a and n >= 1");
  }
  double h() const { return (b - a) / static_cast<double>(n); }
  double center(long i) const { return a + (static_cast<double>(i) + 0.5) * h(); }
  long index_of(double x) const {
    long i = static_cast<long>(std::floor((x - a) / h()));
    return (i < 0 || i >= n) ? -1 : i;
  }
};

struct GridFunction {
  Grid1D grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const Grid1D& g) : grid(g), values(g.n, 0.0) {}
  template <class F>
  GridFunction(const Grid1D& g, const F& f) : grid(g), values(g.n) {
    for (long i = 0; i < g.n; ++i) values[i] = f(g.center(i));
  }
  double integral() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.h();
  }
};

/// Cell-centered polar lattice over the unit disk: n_r radial shells times
/// n_t angles, cell (i,j) centered at r_i = (i+1/2)dr, t_j = (j+1/2)dt.
struct PolarGrid {
  long n_r = 0, n_t = 0;

  PolarGrid() = default;
  PolarGrid(long nr, long nt) : n_r(nr), n_t(nt) {
    if (nr < 1 || nt < 3) throw ConfigError("PolarGrid: need n_r >= 1, n_t >= 3");
  }
  double dr() const { return 1.0 / static_cast<double>(n_r); }
  double dt() const { return 2.0 * 3.14159265358979323846 / static_cast<double>(n_t); }
  long size() const { return n_r * n_t; }
  long index(long i, long j) const { return i * n_t + j; }
  double radius(long i) const { return (static_cast<double>(i) + 0.5) * dr(); }
  double angle(long j) const { return (static_cast<double>(j) + 0.5) * dt(); }
  Vec2 center(long i, long j) const {
    double r = radius(i), t = angle(j);
    return Vec2{{r * std::cos(t), r * std::sin(t)}};
  }
  /// Exact area of cell (i, j): 0.5 (r_out^2 - r_in^2) dt.
  double area(long i) const {
    double r0 = static_cast<double>(i) * dr(), r1 = r0 + dr();
    return 0.5 * (r1 * r1 - r0 * r0) * dt();
  }
};

}  // namespace specdiff
