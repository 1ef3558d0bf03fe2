#pragma once

#include <array>
#include <cmath>

namespace glyphsmith {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// 2D affine map [a b c; d e f; 0 0 1] acting on column vectors, stored
/// row-major as {a, b, c, d, e, f}. The implicit last row is always (0,0,1).
struct AffineMatrix {
  std::array<double, 6> v{1, 0, 0, 0, 1, 0};

  static AffineMatrix identity() { return {}; }
  static AffineMatrix translate(double tx, double ty) { return {{1, 0, tx, 0, 1, ty}}; }
  static AffineMatrix scale(double sx, double sy) { return {{sx, 0, 0, 0, sy, 0}}; }
  static AffineMatrix scale(double s) { return scale(s, s); }
  /// Scale by (sx, sy) about `center`.
  static AffineMatrix scale_about(double sx, double sy, Point center);

  double det() const { return v[0] * v[4] - v[1] * v[3]; }
  bool is_invertible(double tol = 1e-12) const;
  /// Throws NumericalError when the linear block is singular.
  AffineMatrix inverse() const;

  Point apply(Point p) const { return {v[0] * p.x + v[1] * p.y + v[2], v[3] * p.x + v[4] * p.y + v[5]}; }
  std::array<std::array<double, 3>, 3> as_3x3() const;
  bool operator==(const AffineMatrix&) const = default;
};

/// Matrix product: (a * b).apply(p) == a.apply(b.apply(p)).
AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b);

double max_abs_diff(const AffineMatrix& a, const AffineMatrix& b);

/// Sampling-space affine produced by the regressor. Maps normalized output
/// sample positions to normalized input positions, row-major
/// [s_x, k_x, t_x, k_y, s_y, t_y].
struct GridAffine {
  AffineMatrix m;
  static GridAffine identity() { return {}; }
  bool operator==(const GridAffine&) const = default;
};

/// Font-unit transform applied to outline control points (y up).
struct ContentAffine {
  AffineMatrix m;
  static ContentAffine identity() { return {}; }
  bool operator==(const ContentAffine&) const = default;
};

/// How an em box is laid onto a square raster. Font point (x, y) lands at
/// continuous pixel position ((x+dx)*W/U, (U-(y+dy))*W/U); pixel j's center is
/// at normalized coordinate (2j+1)/W - 1.
struct RenderFrame {
  int size = 64;
  double units_per_em = 1000.0;
  double dx = 0.0;
  double dy = 0.0;

  double scale() const { return size / units_per_em; }
  /// Font units -> normalized sampling coordinates (y flipped).
  AffineMatrix to_normalized() const;
  /// Font units -> continuous pixel coordinates (column, row).
  AffineMatrix to_pixels() const;
};

}  // namespace glyphsmith
