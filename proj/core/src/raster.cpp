#include "glyphsmith/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "glyphsmith/error.hpp"

namespace glyphsmith {

double Raster::sum() const {
  double s = 0.0;
  for (double v : data) s += v;
  return s;
}

double Raster::max() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, v);
  return m;
}

Raster operator+(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) throw ShapeError("raster sum: shape mismatch");
  Raster out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Raster clamp01(const Raster& r) {
  Raster out = r;
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Flattening

namespace {

double norm(Point p) { return std::hypot(p.x, p.y); }

int subdivisions(double second_derivative_bound, double tolerance) {
  // Chord error of a parameter interval h is at most h^2/8 * max|B''|.
  if (second_derivative_bound <= 0.0) return 1;
  const double n = std::ceil(std::sqrt(second_derivative_bound / (8.0 * tolerance)));
  return std::clamp(static_cast<int>(n), 1, 4096);
}

}  // namespace

std::vector<Point> flatten_contour(const Contour& contour, double tolerance) {
  std::vector<Point> pts{contour.start};
  Point p0 = contour.start;
  for (const auto& s : contour.segments) {
    switch (s.kind) {
      case SegmentKind::Line:
        break;
      case SegmentKind::Quadratic: {
        const int n = subdivisions(2.0 * norm(p0 - 2.0 * s.c1 + s.end), tolerance);
        for (int k = 1; k < n; ++k) {
          const double t = static_cast<double>(k) / n, u = 1.0 - t;
          pts.push_back(u * u * p0 + 2.0 * u * t * s.c1 + t * t * s.end);
        }
        break;
      }
      case SegmentKind::Cubic: {
        const double a = norm(p0 - 2.0 * s.c1 + s.c2);
        const double b = norm(s.c1 - 2.0 * s.c2 + s.end);
        const int n = subdivisions(6.0 * std::max(a, b), tolerance);
        for (int k = 1; k < n; ++k) {
          const double t = static_cast<double>(k) / n, u = 1.0 - t;
          pts.push_back(u * u * u * p0 + 3.0 * u * u * t * s.c1 + 3.0 * u * t * t * s.c2 + t * t * t * s.end);
        }
        break;
      }
    }
    pts.push_back(s.end);
    p0 = s.end;
  }
  return pts;
}

BoundingBox outline_bbox(const VectorGlyph& glyph, double tolerance_units) {
  BoundingBox box;
  for (const auto& c : glyph.contours) {
    for (Point p : flatten_contour(c, tolerance_units)) {
      if (box.empty) {
        box = {p.x, p.y, p.x, p.y, false};
      } else {
        box.xmin = std::min(box.xmin, p.x);
        box.ymin = std::min(box.ymin, p.y);
        box.xmax = std::max(box.xmax, p.x);
        box.ymax = std::max(box.ymax, p.y);
      }
    }
  }
  return box;
}

Point centering_offset(const VectorGlyph& glyph, const RenderFrame& frame) {
  const double tol = 0.1 / frame.scale();
  const BoundingBox box = outline_bbox(glyph, tol);
  if (box.empty) return {0.0, 0.0};
  const double half = frame.units_per_em / 2.0;
  const Point c = box.center();
  return {half - c.x, half - c.y};
}

// ---------------------------------------------------------------------------
// Scanline fill

namespace {

constexpr int kSuper = 4;

struct Edge {
  double x0, y0, x1, y1;
  int winding;
};

struct Crossing {
  double x;
  int winding;
};

}  // namespace

RenderResult render(const VectorGlyph& glyph, const RenderFrame& frame_in, bool center) {
  if (frame_in.size < 8) throw ShapeError("render: frame size must be at least 8");
  if (!(frame_in.units_per_em > 0)) throw ShapeError("render: units_per_em must be positive");
  RenderResult result;
  result.frame = frame_in;
  const int w = frame_in.size;
  result.raster = Raster(w, w);
  if (glyph.empty() || glyph.segment_count() == 0) {
    result.empty = true;
    return result;
  }
  if (center) {
    const Point d = centering_offset(glyph, frame_in);
    result.frame.dx = d.x;
    result.frame.dy = d.y;
  }

  const AffineMatrix to_px = result.frame.to_pixels();
  std::vector<Edge> edges;
  for (const auto& c : glyph.contours) {
    Contour pc{to_px.apply(c.start), {}};
    pc.segments.reserve(c.segments.size());
    for (const auto& s : c.segments) {
      Segment t = s;
      t.c1 = to_px.apply(s.c1);
      t.c2 = to_px.apply(s.c2);
      t.end = to_px.apply(s.end);
      pc.segments.push_back(t);
    }
    const auto pts = flatten_contour(pc, 0.1);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const Point a = pts[i - 1], b = pts[i];
      if (a.y == b.y) continue;
      edges.push_back({a.x, a.y, b.x, b.y, b.y > a.y ? 1 : -1});
    }
  }

  const int sub_w = w * kSuper;
  std::vector<int> hits(static_cast<std::size_t>(w) * w, 0);
  std::vector<Crossing> crossings;
  for (int r = 0; r < sub_w; ++r) {
    const double y = (r + 0.5) / kSuper;
    crossings.clear();
    for (const auto& e : edges) {
      const double lo = std::min(e.y0, e.y1), hi = std::max(e.y0, e.y1);
      if (y < lo || y >= hi) continue;
      const double x = e.x0 + (y - e.y0) * (e.x1 - e.x0) / (e.y1 - e.y0);
      crossings.push_back({x, e.winding});
    }
    if (crossings.empty()) continue;
    std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
      return a.x < b.x || (a.x == b.x && a.winding < b.winding);
    });
    int winding = 0;
    const int row = r / kSuper;
    for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
      winding += crossings[i].winding;
      if (winding == 0) continue;
      // Subsample columns whose centers lie in [xa, xb).
      const double xa = crossings[i].x * kSuper - 0.5;
      const double xb = crossings[i + 1].x * kSuper - 0.5;
      const int c0 = std::max(0, static_cast<int>(std::ceil(xa)));
      const int c1 = std::min(sub_w, static_cast<int>(std::ceil(xb)));
      for (int c = c0; c < c1; ++c) ++hits[static_cast<std::size_t>(row) * w + c / kSuper];
    }
  }
  constexpr double kInv = 1.0 / (kSuper * kSuper);
  for (std::size_t i = 0; i < hits.size(); ++i) result.raster.data[i] = hits[i] * kInv;
  return result;
}

// ---------------------------------------------------------------------------
// Moments

double raw_moment(const Raster& image, int i, int j) {
  double sum = 0.0;
  for (int y = 0; y < image.height; ++y) {
    double yj = 1.0;
    for (int k = 0; k < j; ++k) yj *= y;
    for (int x = 0; x < image.width; ++x) {
      double xi = 1.0;
      for (int k = 0; k < i; ++k) xi *= x;
      sum += image.at(x, y) * xi * yj;
    }
  }
  return sum;
}

Point centroid(const Raster& image) {
  const double m00 = raw_moment(image, 0, 0) + kMomentEpsilon;
  return {raw_moment(image, 1, 0) / m00, raw_moment(image, 0, 1) / m00};
}

double inertia(const Raster& image) {
  const double m00 = raw_moment(image, 0, 0);
  if (!(m00 > 0.0)) return 0.0;
  const double m10 = raw_moment(image, 1, 0);
  const double m01 = raw_moment(image, 0, 1);
  return raw_moment(image, 2, 0) - m10 * m10 / m00 + raw_moment(image, 0, 2) - m01 * m01 / m00;
}

double iou(const Raster& a, const Raster& b, double threshold) {
  if (!a.same_shape(b)) throw ShapeError("iou: shape mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool pa = a.data[i] > threshold, pb = b.data[i] > threshold;
    inter += (pa && pb);
    uni += (pa || pb);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_pgm(const Raster& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.data.size());
  for (double v : image.data) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  return out;
}

void write_pgm(const Raster& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto bytes = to_pgm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace glyphsmith
