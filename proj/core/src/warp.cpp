#include "glyphsmith/warp.hpp"

#include <cmath>

#include "glyphsmith/error.hpp"

namespace glyphsmith {

namespace {

// Sampling position in continuous pixel coordinates. Written in centered
// pixel units so the identity map lands exactly on integer indices.
struct SampleMap {
  double sx, kx, tx, ky, sy, ty;
  double aspect_x, aspect_y;  // W/H and H/W
  double half_w, half_h;

  SampleMap(const GridAffine& theta, int w, int h) {
    const auto& v = theta.m.v;
    sx = v[0];
    kx = v[1];
    tx = v[2];
    ky = v[3];
    sy = v[4];
    ty = v[5];
    aspect_x = static_cast<double>(w) / h;
    aspect_y = static_cast<double>(h) / w;
    half_w = w / 2.0;
    half_h = h / 2.0;
  }

  double u(int j) const { return j + 0.5 - half_w; }
  double v(int i) const { return i + 0.5 - half_h; }
  double px(double u, double v) const { return sx * u + kx * aspect_x * v + half_w * tx + (half_w - 0.5); }
  double py(double u, double v) const { return ky * aspect_y * u + sy * v + half_h * ty + (half_h - 0.5); }
};

inline double tap(const Raster& img, int x, int y) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return 0.0;
  return img.at(x, y);
}

}  // namespace

Raster warp_forward(const Raster& image, const GridAffine& theta) {
  if (image.width <= 0 || image.height <= 0) throw ShapeError("warp_forward: empty image");
  const int w = image.width, h = image.height;
  const SampleMap map(theta, w, h);
  Raster out(w, h);
  for (int i = 0; i < h; ++i) {
    const double v = map.v(i);
    for (int j = 0; j < w; ++j) {
      const double u = map.u(j);
      const double px = map.px(u, v);
      const double py = map.py(u, v);
      const double fx0 = std::floor(px), fy0 = std::floor(py);
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) continue;
      const double fx = px - fx0, fy = py - fy0;
      out.at(j, i) = tap(image, x0, y0) * ((1.0 - fx) * (1.0 - fy)) + tap(image, x0 + 1, y0) * (fx * (1.0 - fy)) +
                     tap(image, x0, y0 + 1) * ((1.0 - fx) * fy) + tap(image, x0 + 1, y0 + 1) * (fx * fy);
    }
  }
  return out;
}

WarpGradients warp_backward(const Raster& image, const GridAffine& theta, const Raster& d_out, bool need_image_grad) {
  if (!image.same_shape(d_out)) throw ShapeError("warp_backward: gradient shape mismatch");
  const int w = image.width, h = image.height;
  const SampleMap map(theta, w, h);
  WarpGradients g;
  if (need_image_grad) g.d_image = Raster(w, h);
  double ds_x = 0, dk_x = 0, dt_x = 0, dk_y = 0, ds_y = 0, dt_y = 0;
  for (int i = 0; i < h; ++i) {
    const double v = map.v(i);
    for (int j = 0; j < w; ++j) {
      const double go = d_out.at(j, i);
      if (go == 0.0) continue;
      const double u = map.u(j);
      const double px = map.px(u, v);
      const double py = map.py(u, v);
      const double fx0 = std::floor(px), fy0 = std::floor(py);
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) continue;
      const double fx = px - fx0, fy = py - fy0;
      const double i00 = tap(image, x0, y0), i10 = tap(image, x0 + 1, y0);
      const double i01 = tap(image, x0, y0 + 1), i11 = tap(image, x0 + 1, y0 + 1);

      const double dpx = go * ((1.0 - fy) * (i10 - i00) + fy * (i11 - i01));
      const double dpy = go * ((1.0 - fx) * (i01 - i00) + fx * (i11 - i10));
      ds_x += dpx * u;
      dk_x += dpx * map.aspect_x * v;
      dt_x += dpx * map.half_w;
      dk_y += dpy * map.aspect_y * u;
      ds_y += dpy * v;
      dt_y += dpy * map.half_h;

      if (need_image_grad) {
        auto scatter = [&](int x, int y, double wgt) {
          if (x >= 0 && y >= 0 && x < w && y < h) g.d_image.at(x, y) += go * wgt;
        };
        scatter(x0, y0, (1.0 - fx) * (1.0 - fy));
        scatter(x0 + 1, y0, fx * (1.0 - fy));
        scatter(x0, y0 + 1, (1.0 - fx) * fy);
        scatter(x0 + 1, y0 + 1, fx * fy);
      }
    }
  }
  g.d_theta = {ds_x, dk_x, dt_x, dk_y, ds_y, dt_y};
  return g;
}

}  // namespace glyphsmith
