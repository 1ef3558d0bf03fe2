#include "glyphsmith/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "glyphsmith/error.hpp"
#include "glyphsmith/rng.hpp"

namespace glyphsmith {

namespace {

Contour polygon(const std::vector<Point>& pts) {
  Contour c{pts.front(), {}};
  for (std::size_t i = 1; i < pts.size(); ++i) c.segments.push_back(Segment::line(pts[i]));
  c.segments.push_back(Segment::line(pts.front()));
  return c;
}

Contour rect(double x0, double y0, double x1, double y1) {
  // Counter-clockwise in y-up coordinates, like every contour generated here.
  return polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

Contour ellipse(Point c, double rx, double ry) {
  constexpr double k = 0.5522847498307936;
  Contour out{{c.x + rx, c.y}, {}};
  out.segments.push_back(Segment::cubic({c.x + rx, c.y + k * ry}, {c.x + k * rx, c.y + ry}, {c.x, c.y + ry}));
  out.segments.push_back(Segment::cubic({c.x - k * rx, c.y + ry}, {c.x - rx, c.y + k * ry}, {c.x - rx, c.y}));
  out.segments.push_back(Segment::cubic({c.x - rx, c.y - k * ry}, {c.x - k * rx, c.y - ry}, {c.x, c.y - ry}));
  out.segments.push_back(Segment::cubic({c.x + k * rx, c.y - ry}, {c.x + rx, c.y - k * ry}, out.start));
  return out;
}

Contour convex_polygon(SplitMix64& rng, Point c, double rx, double ry) {
  const int n = 5 + static_cast<int>(rng.below(4));
  std::vector<double> angles;
  const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < n; ++i) angles.push_back(offset + 2.0 * std::numbers::pi * (i + rng.uniform(0.2, 0.8)) / n);
  std::vector<Point> pts;
  for (double a : angles) pts.push_back({c.x + rx * std::cos(a), c.y + ry * std::sin(a)});
  return polygon(pts);
}

/// A component whose ink box is exactly [0, w] x [0, h]: a vertical stroke
/// and a horizontal stroke pin the extents, then up to two free shapes.
VectorGlyph random_component(SplitMix64& rng, double w, double h, int upem) {
  VectorGlyph g;
  g.units_per_em = upem;
  const double t = upem * rng.uniform(0.06, 0.10);
  const double vx = rng.uniform(0.0, std::max(0.0, w - t));
  const double hy = rng.uniform(0.0, std::max(0.0, h - t));
  g.contours.push_back(rect(vx, 0.0, vx + std::min(t, w), h));
  g.contours.push_back(rect(0.0, hy, w, hy + std::min(t, h)));
  const int extra = static_cast<int>(rng.below(3));
  for (int i = 0; i < extra; ++i) {
    const double rx = rng.uniform(0.08, 0.22) * w, ry2 = rng.uniform(0.08, 0.22) * h;
    const double mx = std::max(rx, t / 2), my = std::max(ry2, t / 2);
    const Point c{rng.uniform(mx, w - mx), rng.uniform(my, h - my)};
    switch (rng.below(3)) {
      case 0:
        g.contours.push_back(convex_polygon(rng, c, rx, ry2));
        break;
      case 1:
        g.contours.push_back(ellipse(c, rx, ry2));
        break;
      default: {
        // Strokes run the full width or height of the box.
        if (rng.below(2) == 0) {
          g.contours.push_back(rect(c.x - t / 2, 0.0, c.x + t / 2, h));
        } else {
          g.contours.push_back(rect(0.0, c.y - t / 2, w, c.y + t / 2));
        }
        break;
      }
    }
  }
  return g;
}

double lerp_unit(double v, double lo, double hi) { return std::clamp((v - lo) / (hi - lo), 0.0, 1.0); }

struct Part {
  VectorGlyph glyph;
  double w = 0, h = 0;  // ink extents in font units
};

Part make_part(SplitMix64& rng, double w_lo, double w_hi, double h_lo, double h_hi, int upem) {
  Part p;
  p.w = rng.uniform(w_lo, w_hi) * upem;
  p.h = rng.uniform(h_lo, h_hi) * upem;
  p.glyph = random_component(rng, p.w, p.h, upem);
  return p;
}

// Scale about the ink-box center, then move that center to `to`.
ContentAffine place(const Part& p, double sx, double sy, Point to) {
  return ContentAffine{AffineMatrix::translate(to.x, to.y) * AffineMatrix::scale(sx, sy) *
                       AffineMatrix::translate(-p.w / 2, -p.h / 2)};
}

// Roles along the main axis: "narrow" parts take the leading slots, the
// trailing part is "wide". Scales interpolate linearly over the extent
// ranges so placement is a deterministic function of the shapes.
struct Role {
  double lo, hi;              // extent along the main axis, em fraction
  double scale_lo, scale_hi;  // main-axis scale over that range
};

void row_layout(SplitMix64& rng, const std::vector<Role>& roles, bool vertical, int upem, SyntheticSample& s) {
  std::vector<Part> parts;
  for (const auto& r : roles) {
    parts.push_back(vertical ? make_part(rng, 0.6, 0.85, r.lo, r.hi, upem) : make_part(rng, r.lo, r.hi, 0.6, 0.85, upem));
  }
  std::vector<double> main_scale, cross_scale, extent;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double along = vertical ? parts[k].h : parts[k].w;
    const double across = vertical ? parts[k].w : parts[k].h;
    main_scale.push_back(roles[k].scale_lo +
                         (roles[k].scale_hi - roles[k].scale_lo) * lerp_unit(along / upem, roles[k].lo, roles[k].hi));
    cross_scale.push_back(0.85 + 0.15 * lerp_unit(across / upem, 0.6, 0.85));
    extent.push_back(main_scale.back() * along);
  }
  // Gap in [0, 0.05] em, read off the first part's cross extent.
  const double first_across = vertical ? parts[0].w : parts[0].h;
  const double gap = 0.05 * upem * lerp_unit(first_across / upem, 0.6, 0.85);
  double total = gap * static_cast<double>(parts.size() - 1);
  for (double e : extent) total += e;
  double cursor = upem / 2.0 - total / 2.0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double center = cursor + extent[k] / 2.0;
    cursor += extent[k] + gap;
    // Vertical layouts stack from the top (larger y) down.
    const Point to = vertical ? Point{upem / 2.0, upem - center} : Point{center, upem / 2.0};
    const double sx = vertical ? cross_scale[k] : main_scale[k];
    const double sy = vertical ? main_scale[k] : cross_scale[k];
    s.truth.push_back(place(parts[k], sx, sy, to));
    s.components.push_back(std::move(parts[k].glyph));
  }
}

// Enclosure outlines per variation, drawn on the unit square, and the
// anchor of the enclosed part (fractions of the em box).
struct Enclosure {
  bool left, right, top, bottom;
  Point anchor;
};

constexpr Enclosure kEnclosures[8] = {
    {true, true, true, true, {0.50, 0.50}},     // full surround
    {true, true, true, false, {0.50, 0.42}},    // open bottom
    {true, true, false, true, {0.50, 0.58}},    // open top
    {true, false, true, true, {0.58, 0.50}},    // open right
    {true, false, true, false, {0.60, 0.42}},   // top-left
    {false, true, true, false, {0.40, 0.42}},   // top-right
    {true, false, false, true, {0.60, 0.58}},   // bottom-left
    {false, true, false, true, {0.40, 0.58}},   // bottom-right
};

void enclosed_layout(SplitMix64& rng, int variation, int upem, SyntheticSample& s) {
  const Enclosure& e = kEnclosures[variation];
  Part outer;
  outer.w = rng.uniform(0.8, 0.95) * upem;
  outer.h = rng.uniform(0.8, 0.95) * upem;
  outer.glyph.units_per_em = upem;
  const double t = upem * rng.uniform(0.06, 0.09);
  const double w = outer.w, h = outer.h;
  // Partial frames still need their ink box to span [0,w] x [0,h].
  if (e.left) outer.glyph.contours.push_back(rect(0, 0, t, h));
  if (e.right) outer.glyph.contours.push_back(rect(w - t, 0, w, h));
  if (e.top) outer.glyph.contours.push_back(rect(0, h - t, w, h));
  if (e.bottom) outer.glyph.contours.push_back(rect(0, 0, w, t));
  if (!e.left && !e.right) outer.glyph.contours.push_back(rect(0, 0, t, h));
  if (!e.top && !e.bottom) outer.glyph.contours.push_back(rect(0, 0, w, t));

  Part inner = make_part(rng, 0.5, 0.85, 0.5, 0.85, upem);
  const double so = 0.9 + 0.1 * lerp_unit(outer.w / upem, 0.8, 0.95);
  const double si_x = 0.35 + 0.20 * lerp_unit(inner.w / upem, 0.5, 0.85);
  const double si_y = 0.35 + 0.20 * lerp_unit(inner.h / upem, 0.5, 0.85);
  s.truth.push_back(place(outer, so, so, {upem / 2.0, upem / 2.0}));
  s.truth.push_back(place(inner, si_x, si_y, {e.anchor.x * upem, e.anchor.y * upem}));
  s.components.push_back(std::move(outer.glyph));
  s.components.push_back(std::move(inner.glyph));
}

}  // namespace

SyntheticDataset generate_synthetic(std::uint64_t seed, std::size_t n, const Layout& layout, int units_per_em) {
  if (units_per_em <= 0) throw ConfigError("units_per_em must be positive");
  SyntheticDataset d;
  d.layout = layout;
  d.units_per_em = units_per_em;
  d.seed = seed;
  SplitMix64 rng(seed);
  const Role narrow2{0.30, 0.50, 0.40, 0.60}, wide2{0.55, 0.85, 0.40, 0.60};
  const Role narrow3{0.30, 0.50, 0.30, 0.40}, wide3{0.55, 0.85, 0.40, 0.50};
  for (std::size_t i = 0; i < n; ++i) {
    SyntheticSample s;
    switch (layout.kind) {
      case LayoutKind::NL01:
        row_layout(rng, {narrow2, wide2}, false, units_per_em, s);
        break;
      case LayoutKind::NL02:
        row_layout(rng, {narrow2, wide2}, true, units_per_em, s);
        break;
      case LayoutKind::NL04:
        row_layout(rng, {narrow3, narrow3, wide3}, false, units_per_em, s);
        break;
      case LayoutKind::NL05:
        row_layout(rng, {narrow3, narrow3, wide3}, true, units_per_em, s);
        break;
      case LayoutKind::NL03:
        if (!layout.variation) throw ConfigError("NL03 synthesis needs a variation, e.g. NL03-0");
        enclosed_layout(rng, *layout.variation, units_per_em, s);
        break;
      default:
        throw ConfigError("cannot synthesize layout " + layout_tag(layout));
    }
    std::vector<VectorGlyph> placed;
    for (std::size_t k = 0; k < s.components.size(); ++k) placed.push_back(apply_affine(s.components[k], s.truth[k]));
    s.target = merge(placed);
    d.samples.push_back(std::move(s));
  }
  return d;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json affine_json(const AffineMatrix& m) { return json(std::vector<double>(m.v.begin(), m.v.end())); }

AffineMatrix affine_from(const json& j) {
  if (!j.is_array() || j.size() != 6) throw ParseError("dataset: affine must have 6 entries");
  AffineMatrix m;
  for (std::size_t i = 0; i < 6; ++i) m.v[i] = j[i].get<double>();
  return m;
}

}  // namespace

std::string serialize_dataset(const SyntheticDataset& data) {
  json j;
  j["layout"] = layout_tag(data.layout);
  j["units_per_em"] = data.units_per_em;
  j["seed"] = data.seed;
  j["samples"] = json::array();
  for (const auto& s : data.samples) {
    json js;
    js["components"] = json::array();
    for (std::size_t k = 0; k < s.components.size(); ++k) {
      js["components"].push_back({{"d", to_svg_path(s.components[k].contours)}, {"affine", affine_json(s.truth[k].m)}});
    }
    js["target"] = to_svg_path(s.target.contours);
    j["samples"].push_back(std::move(js));
  }
  return j.dump();
}

SyntheticDataset parse_dataset(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset JSON: ") + e.what());
  }
  SyntheticDataset d;
  try {
    const auto layout = parse_layout(j.at("layout").get<std::string>());
    if (!layout) throw ParseError("dataset: unknown layout");
    d.layout = *layout;
    d.units_per_em = j.at("units_per_em").get<int>();
    d.seed = j.value("seed", std::uint64_t{0});
    for (const auto& js : j.at("samples")) {
      SyntheticSample s;
      for (const auto& c : js.at("components")) {
        VectorGlyph g;
        g.units_per_em = d.units_per_em;
        g.contours = parse_svg_path(c.at("d").get<std::string>());
        s.components.push_back(std::move(g));
        s.truth.push_back(ContentAffine{affine_from(c.at("affine"))});
      }
      s.target.units_per_em = d.units_per_em;
      s.target.contours = parse_svg_path(js.at("target").get<std::string>());
      d.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  return d;
}

void save_dataset(const SyntheticDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_dataset(data) << '\n';
}

SyntheticDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_dataset(os.str());
}

std::vector<TrainSample> rasterize_dataset(const SyntheticDataset& data, int input_size) {
  const RenderFrame frame{input_size, static_cast<double>(data.units_per_em), 0.0, 0.0};
  std::vector<TrainSample> out;
  out.reserve(data.samples.size());
  for (const auto& s : data.samples) {
    TrainSample t;
    for (const auto& c : s.components) {
      RenderResult r = render(c, frame, true);
      t.components.push_back(std::move(r.raster));
      t.shifts.push_back({r.frame.dx, r.frame.dy});
    }
    RenderResult tr = render(s.target, frame, true);
    t.target = std::move(tr.raster);
    t.target_shift = {tr.frame.dx, tr.frame.dy};
    for (const auto& a : s.truth) {
      t.truth.push_back(ContentAffine{AffineMatrix::translate(t.target_shift.x, t.target_shift.y) * a.m});
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace glyphsmith
