#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glyphsmith/geometry.hpp"
#include "glyphsmith/glyph.hpp"

namespace glyphsmith {

/// Row-major grayscale image. Pixel (x, y) is column x, row y, both 0-based,
/// rows growing downward. Values are non-negative; sums of component
/// coverages may exceed 1.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Raster() = default;
  Raster(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Raster& o) const { return width == o.width && height == o.height; }
  double sum() const;
  double max() const;
  bool operator==(const Raster&) const = default;
};

Raster operator+(const Raster& a, const Raster& b);
Raster clamp01(const Raster& r);

struct RenderResult {
  Raster raster;
  RenderFrame frame;   // the frame actually used, including any centering shift
  bool empty = false;  // glyph had no outline; raster is all zero
};

/// Rasterizes with the nonzero winding rule and 4x4 supersampled box-filtered
/// coverage. Curves are flattened to within 0.1 px. With `center`, the frame's
/// (dx, dy) is replaced by the shift that puts the outline's bounding-box
/// center on the image center.
RenderResult render(const VectorGlyph& glyph, const RenderFrame& frame, bool center);

/// Outline bounding box after flattening (font units, no frame offset).
BoundingBox outline_bbox(const VectorGlyph& glyph, double tolerance_units);

/// Centering shift (dx, dy) in font units for `frame`.
Point centering_offset(const VectorGlyph& glyph, const RenderFrame& frame);

/// Polyline approximation of a contour within `tolerance` (same units as the
/// contour). The first point is the contour start; the last equals it.
std::vector<Point> flatten_contour(const Contour& contour, double tolerance);

// Image moments. Coordinates are 0-based pixel indices; x is the column.

inline constexpr double kMomentEpsilon = 1e-6;

/// Sum over pixels of I(x,y) * x^i * y^j.
double raw_moment(const Raster& image, int i, int j);

/// (Phi10, Phi01) / (Phi00 + eps).
Point centroid(const Raster& image);

/// Phi20 - Phi10^2/Phi00 + Phi02 - Phi01^2/Phi00; 0 for an image without mass.
double inertia(const Raster& image);

/// Intersection over union of the masks {v > threshold}. Two empty masks
/// give 1.
double iou(const Raster& a, const Raster& b, double threshold = 0.5);

/// Binary PGM (P5, maxval 255). Values are clamped to [0,1] and rounded to
/// the nearest of 256 levels.
std::string to_pgm(const Raster& image);
void write_pgm(const Raster& image, const std::filesystem::path& path);

}  // namespace glyphsmith
