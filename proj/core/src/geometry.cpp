#include "glyphsmith/geometry.hpp"

#include <algorithm>

#include "glyphsmith/error.hpp"

namespace glyphsmith {

AffineMatrix AffineMatrix::scale_about(double sx, double sy, Point c) {
  return translate(c.x, c.y) * scale(sx, sy) * translate(-c.x, -c.y);
}

bool AffineMatrix::is_invertible(double tol) const {
  const double scale = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[3]), std::abs(v[4]), 1e-300});
  return std::isfinite(det()) && std::abs(det()) > tol * scale * scale;
}

AffineMatrix AffineMatrix::inverse() const {
  if (!is_invertible()) throw NumericalError("affine matrix is singular");
  const double d = det();
  const double a = v[4] / d, b = -v[1] / d, dd = -v[3] / d, e = v[0] / d;
  return {{a, b, -(a * v[2] + b * v[5]), dd, e, -(dd * v[2] + e * v[5])}};
}

std::array<std::array<double, 3>, 3> AffineMatrix::as_3x3() const {
  return {{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {0.0, 0.0, 1.0}}};
}

AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b) {
  const auto& x = a.v;
  const auto& y = b.v;
  return {{x[0] * y[0] + x[1] * y[3], x[0] * y[1] + x[1] * y[4], x[0] * y[2] + x[1] * y[5] + x[2],
           x[3] * y[0] + x[4] * y[3], x[3] * y[1] + x[4] * y[4], x[3] * y[2] + x[4] * y[5] + x[5]}};
}

double max_abs_diff(const AffineMatrix& a, const AffineMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < 6; ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

AffineMatrix RenderFrame::to_normalized() const {
  const double k = 2.0 / units_per_em;
  return {{k, 0.0, k * dx - 1.0, 0.0, -k, 1.0 - k * dy}};
}

AffineMatrix RenderFrame::to_pixels() const {
  const double s = scale();
  return {{s, 0.0, dx * s, 0.0, -s, (units_per_em - dy) * s}};
}

}  // namespace glyphsmith
