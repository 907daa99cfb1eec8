#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace specdiff {

/// Fixed-dimension point/velocity type. D is the spatial dimension.
template <int D>
struct Vec {
  std::array<double, D> c{};

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < D; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < D; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (int i = 0; i < D; ++i) c[i] *= a;
    return *this;
  }
};

using Vec1 = Vec<1>;
using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int D>
inline Vec<D> operator+(Vec<D> a, const Vec<D>& b) { return a += b; }
template <int D>
inline Vec<D> operator-(Vec<D> a, const Vec<D>& b) { return a -= b; }
template <int D>
inline Vec<D> operator*(double a, Vec<D> v) { return v *= a; }
template <int D>
inline Vec<D> operator*(Vec<D> v, double a) { return v *= a; }
template <int D>
inline Vec<D> operator-(Vec<D> v) { return v *= -1.0; }

template <int D>
inline double dot(const Vec<D>& a, const Vec<D>& b) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <int D>
inline double norm2(const Vec<D>& a) { return dot(a, a); }

template <int D>
inline double norm(const Vec<D>& a) { return std::sqrt(norm2(a)); }

template <int D>
inline Vec<D> normalized(const Vec<D>& a) {
  double n = norm(a);
  Vec<D> r = a;
  if (n > 0.0) r *= 1.0 / n;
  return r;
}

/// 2D cross product a x b (scalar).
inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

/// pi/2 rotation, S = [[0,-1],[1,0]].
inline Vec2 perp(const Vec2& a) { return Vec2{{-a[1], a[0]}}; }

/// Row-major DxD matrix.
template <int D>
struct Mat {
  std::array<Vec<D>, D> row{};

  Vec<D>& operator[](int i) { return row[i]; }
  const Vec<D>& operator[](int i) const { return row[i]; }

  static Mat identity() {
    Mat m;
    for (int i = 0; i < D; ++i) m.row[i][i] = 1.0;
    return m;
  }
};

using Mat2 = Mat<2>;

template <int D>
inline Vec<D> operator*(const Mat<D>& m, const Vec<D>& v) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = dot(m[i], v);
  return r;
}

template <int D>
inline Mat<D> operator*(const Mat<D>& a, const Mat<D>& b) {
  Mat<D> r;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      double s = 0.0;
      for (int k = 0; k < D; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}

template <int D>
inline Mat<D> operator+(Mat<D> a, const Mat<D>& b) {
  for (int i = 0; i < D; ++i) a[i] += b[i];
  return a;
}

template <int D>
inline Mat<D> operator-(Mat<D> a, const Mat<D>& b) {
  for (int i = 0; i < D; ++i) a[i] -= b[i];
  return a;
}

template <int D>
inline Mat<D> operator*(double s, Mat<D> a) {
  for (int i = 0; i < D; ++i) a[i] *= s;
  return a;
}

template <int D>
inline Mat<D> transpose(const Mat<D>& m) {
  Mat<D> r;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) r[i][j] = m[j][i];
  return r;
}

/// Outer product a b^T.
template <int D>
inline Mat<D> outer(const Vec<D>& a, const Vec<D>& b) {
  Mat<D> r;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) r[i][j] = a[i] * b[j];
  return r;
}

inline double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

/// Frobenius norm.
template <int D>
inline double fnorm(const Mat<D>& m) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += norm2(m[i]);
  return std::sqrt(s);
}

/// Rotation by angle phi (2D).
inline Mat2 rotation(double phi) {
  double c = std::cos(phi), s = std::sin(phi);
  Mat2 r;
  r[0] = Vec2{{c, -s}};
  r[1] = Vec2{{s, c}};
  return r;
}

}  // namespace specdiff
