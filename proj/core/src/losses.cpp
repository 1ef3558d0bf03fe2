#include "glyphsmith/losses.hpp"

#include <cmath>

#include "glyphsmith/error.hpp"

namespace glyphsmith {

void LossWeights::validate() const {
  for (double w : {pixel, overlap, centroid, inertia}) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights must be finite and non-negative");
  }
  if (pixel == 0.0 && overlap == 0.0 && centroid == 0.0 && inertia == 0.0) {
    throw ConfigError("at least one loss weight must be positive");
  }
}

LossWeights LossWeights::rescaled_for(int resolution) const {
  if (resolution <= 0) throw ConfigError("resolution must be positive");
  const double r = 256.0 / resolution;
  LossWeights out = *this;
  out.centroid = centroid * r;
  out.inertia = inertia * r * r * r * r;
  return out;
}

namespace {

void require_same(const Raster& s, const Raster& c, const char* what) {
  if (!s.same_shape(c)) throw ShapeError(std::string(what) + ": shape mismatch");
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct Moments {
  double m00 = 0, m10 = 0, m01 = 0, m20 = 0, m02 = 0;

  explicit Moments(const Raster& img) {
    for (int y = 0; y < img.height; ++y) {
      const double fy = y;
      double row = 0, row_x = 0, row_xx = 0;
      for (int x = 0; x < img.width; ++x) {
        const double v = img.at(x, y);
        const double fx = x;
        row += v;
        row_x += v * fx;
        row_xx += v * fx * fx;
      }
      m00 += row;
      m10 += row_x;
      m20 += row_xx;
      m01 += row * fy;
      m02 += row * fy * fy;
    }
  }

  double mass() const { return m00 + kMomentEpsilon; }
  double cx() const { return m10 / mass(); }
  double cy() const { return m01 / mass(); }
  // Central moments use the exact mass; only the centroid is regularized.
  bool has_mass() const { return m00 > 0.0; }
  double mean_x() const { return has_mass() ? m10 / m00 : 0.0; }
  double mean_y() const { return has_mass() ? m01 / m00 : 0.0; }
  double psi() const { return has_mass() ? m20 - m10 * mean_x() + m02 - m01 * mean_y() : 0.0; }
};

}  // namespace

LossValue loss_pixel(const Raster& s, const Raster& c) {
  require_same(s, c, "loss_pixel");
  LossValue out;
  out.grad = Raster(s.width, s.height);
  const double n = static_cast<double>(s.size());
  if (s.size() == 0) return out;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double d = s.data[i] - c.data[i];
    sum += std::abs(d);
    out.grad.data[i] = sign(d) / n;
  }
  out.value = sum / n;
  return out;
}

LossValue loss_overlap(const Raster& s) {
  LossValue out;
  out.grad = Raster(s.width, s.height);
  double num = 0.0, den = 0.0;
  for (double v : s.data) {
    num += std::min(std::max(v - 1.0, 0.0), 1.0);
    den += v;
  }
  if (!(den > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.value = num / den;
  const double inv = 1.0 / den;
  const double base = -num * inv * inv;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double v = s.data[i];
    const double dn = (v > 1.0 && v < 2.0) ? 1.0 : 0.0;
    out.grad.data[i] = dn * inv + base;
  }
  return out;
}

LossValue loss_centroid(const Raster& s, const Raster& c) {
  require_same(s, c, "loss_centroid");
  LossValue out;
  out.grad = Raster(s.width, s.height);
  const Moments ms(s), mc(c);
  const double dx = ms.cx() - mc.cx();
  const double dy = ms.cy() - mc.cy();
  out.value = 0.5 * (std::abs(dx) + std::abs(dy));
  const double ax = 0.5 * sign(dx) / ms.mass();
  const double ay = 0.5 * sign(dy) / ms.mass();
  const double cx = ms.cx(), cy = ms.cy();
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) out.grad.at(x, y) = ax * (x - cx) + ay * (y - cy);
  }
  return out;
}

LossValue loss_inertia(const Raster& s, const Raster& c) {
  require_same(s, c, "loss_inertia");
  LossValue out;
  out.grad = Raster(s.width, s.height);
  const Moments ms(s), mc(c);
  const double d = ms.psi() - mc.psi();
  out.value = std::abs(d);
  const double sg = sign(d);
  if (sg == 0.0) return out;
  // d psi / d S(x,y) = (x - cx)^2 + (y - cy)^2
  const double cx = ms.mean_x(), cy = ms.mean_y();
  for (int y = 0; y < s.height; ++y) {
    const double ry = (y - cy) * (y - cy);
    for (int x = 0; x < s.width; ++x) out.grad.at(x, y) = sg * ((x - cx) * (x - cx) + ry);
  }
  return out;
}

LossBreakdown loss_total(const Raster& s, const Raster& c, const LossWeights& w) {
  require_same(s, c, "loss_total");
  LossBreakdown out;
  out.grad = Raster(s.width, s.height);
  auto accumulate = [&](double weight, const LossValue& term, double& slot) {
    slot = term.value;
    if (weight == 0.0) return;
    out.total += weight * term.value;
    for (std::size_t i = 0; i < out.grad.data.size(); ++i) out.grad.data[i] += weight * term.grad.data[i];
  };
  accumulate(w.pixel, loss_pixel(s, c), out.pixel);
  accumulate(w.overlap, loss_overlap(s), out.overlap);
  if (w.centroid != 0.0) accumulate(w.centroid, loss_centroid(s, c), out.centroid);
  if (w.inertia != 0.0) accumulate(w.inertia, loss_inertia(s, c), out.inertia);
  return out;
}

}  // namespace glyphsmith
