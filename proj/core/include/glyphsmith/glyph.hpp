#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "glyphsmith/geometry.hpp"

namespace glyphsmith {

enum class SegmentKind { Line, Quadratic, Cubic };

/// One outline segment. The start point is implicit (previous endpoint).
/// Line uses only `end`; Quadratic uses c1; Cubic uses c1 and c2.
struct Segment {
  SegmentKind kind = SegmentKind::Line;
  Point c1;
  Point c2;
  Point end;

  static Segment line(Point p) { return {SegmentKind::Line, {}, {}, p}; }
  static Segment quad(Point c, Point p) { return {SegmentKind::Quadratic, c, {}, p}; }
  static Segment cubic(Point a, Point b, Point p) { return {SegmentKind::Cubic, a, b, p}; }
  bool operator==(const Segment&) const = default;
};

/// Closed contour: the last segment ends exactly at `start`.
struct Contour {
  Point start;
  std::vector<Segment> segments;
  bool operator==(const Contour&) const = default;
};

struct BoundingBox {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  bool empty = true;
  Point center() const { return {(xmin + xmax) / 2, (ymin + ymax) / 2}; }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

struct VectorGlyph {
  int units_per_em = 1000;
  std::vector<Contour> contours;

  bool empty() const { return contours.empty(); }
  std::size_t segment_count() const;
  /// Box over anchors and control points.
  BoundingBox control_bbox() const;
  bool operator==(const VectorGlyph&) const = default;
};

/// Parses the M/L/H/V/Q/T/C/S/Z subset (absolute and relative). Unclosed
/// subpaths are closed with a line. Throws ParseError.
std::vector<Contour> parse_svg_path(std::string_view d);

/// Serializes contours with absolute commands and shortest round-trip numbers.
std::string to_svg_path(const std::vector<Contour>& contours);

VectorGlyph apply_affine(const VectorGlyph& glyph, const ContentAffine& m);

/// Concatenates contours in input order. Throws DataError on mismatched
/// units_per_em.
VectorGlyph merge(const std::vector<VectorGlyph>& glyphs);

/// Content transform equivalent to warping a raster of `frame` with theta:
/// N^-1 * inv(theta) * N, N being the frame's font-unit -> normalized map.
ContentAffine grid_to_content_affine(const GridAffine& theta, const RenderFrame& frame);

/// Inverse of grid_to_content_affine for the same frame.
GridAffine content_to_grid_affine(const ContentAffine& m, const RenderFrame& frame);

/// Flattened parameters for an editor that applies transforms about the
/// component's bounding-box left-bottom corner, in the order
/// [s_x, k_x, k_y, s_y, t_x, t_y].
std::array<double, 6> content_to_editor_params(const ContentAffine& m, Point component_origin);
ContentAffine editor_params_to_content(const std::array<double, 6>& params, Point component_origin);

}  // namespace glyphsmith
