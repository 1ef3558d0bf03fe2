#include "glyphsmith/glyph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "glyphsmith/error.hpp"

namespace glyphsmith {

std::size_t VectorGlyph::segment_count() const {
  std::size_t n = 0;
  for (const auto& c : contours) n += c.segments.size();
  return n;
}

BoundingBox VectorGlyph::control_bbox() const {
  BoundingBox box;
  auto add = [&box](Point p) {
    if (box.empty) {
      box = {p.x, p.y, p.x, p.y, false};
      return;
    }
    box.xmin = std::min(box.xmin, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.xmax = std::max(box.xmax, p.x);
    box.ymax = std::max(box.ymax, p.y);
  };
  for (const auto& c : contours) {
    add(c.start);
    for (const auto& s : c.segments) {
      if (s.kind != SegmentKind::Line) add(s.c1);
      if (s.kind == SegmentKind::Cubic) add(s.c2);
      add(s.end);
    }
  }
  return box;
}

// ---------------------------------------------------------------------------
// Path data parsing

namespace {

class PathScanner {
 public:
  explicit PathScanner(std::string_view d) : d_(d) {}

  void skip_separators() {
    while (pos_ < d_.size() && (std::isspace(static_cast<unsigned char>(d_[pos_])) || d_[pos_] == ',')) ++pos_;
  }

  bool at_end() {
    skip_separators();
    return pos_ >= d_.size();
  }

  bool next_is_number() {
    skip_separators();
    if (pos_ >= d_.size()) return false;
    const char c = d_[pos_];
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
  }

  char command() {
    skip_separators();
    return d_[pos_++];
  }

  double number() {
    skip_separators();
    if (pos_ >= d_.size()) throw ParseError("expected number at end of path data");
    std::size_t start = pos_;
    if (d_[start] == '+') ++start;
    // from_chars is greedy; stop a second '.' from merging "0.5.5" into one token.
    std::size_t end = start;
    bool seen_dot = false, seen_exp = false, seen_digit = false;
    if (end < d_.size() && d_[end] == '-') ++end;
    while (end < d_.size()) {
      const char c = d_[end];
      if (c >= '0' && c <= '9') {
        seen_digit = true;
        ++end;
      } else if (c == '.' && !seen_dot && !seen_exp) {
        seen_dot = true;
        ++end;
      } else if ((c == 'e' || c == 'E') && seen_digit && !seen_exp) {
        std::size_t k = end + 1;
        if (k < d_.size() && (d_[k] == '+' || d_[k] == '-')) ++k;
        if (k < d_.size() && d_[k] >= '0' && d_[k] <= '9') {
          seen_exp = true;
          end = k;
        } else {
          break;
        }
      } else {
        break;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(d_.data() + start, d_.data() + end, value);
    if (ec != std::errc{} || ptr != d_.data() + end || !seen_digit) {
      throw ParseError("malformed number near offset " + std::to_string(pos_));
    }
    if (!std::isfinite(value)) throw ParseError("non-finite number in path data");
    pos_ = end;
    return value;
  }

 private:
  std::string_view d_;
  std::size_t pos_ = 0;
};

struct PathBuilder {
  std::vector<Contour> contours;
  Contour current;
  bool open = false;
  Point cursor;
  Point last_ctrl;
  char last_cmd = 0;

  void begin(Point p) {
    finish();
    current = Contour{p, {}};
    open = true;
    cursor = p;
  }

  void ensure_open() {
    if (!open) {
      current = Contour{cursor, {}};
      open = true;
    }
  }

  void add(const Segment& s) {
    ensure_open();
    current.segments.push_back(s);
    cursor = s.end;
  }

  void finish() {
    if (!open) return;
    if (!current.segments.empty() && !(cursor == current.start)) {
      current.segments.push_back(Segment::line(current.start));
    }
    if (!current.segments.empty()) contours.push_back(std::move(current));
    cursor = current.start;
    current = Contour{};
    open = false;
  }
};

}  // namespace

std::vector<Contour> parse_svg_path(std::string_view d) {
  PathScanner scan(d);
  if (scan.at_end()) throw ParseError("empty path data");
  PathBuilder b;
  char cmd = 0;
  bool first = true;
  while (!scan.at_end()) {
    if (!scan.next_is_number()) {
      cmd = scan.command();
    } else if (cmd == 0) {
      throw ParseError("path data must start with a command");
    } else if (cmd == 'M') {
      cmd = 'L';
    } else if (cmd == 'm') {
      cmd = 'l';
    } else if (cmd == 'Z' || cmd == 'z') {
      throw ParseError("numbers after closepath");
    }
    if (first && cmd != 'M' && cmd != 'm') throw ParseError("path data must start with moveto");
    first = false;

    const bool rel = std::islower(static_cast<unsigned char>(cmd)) != 0;
    const Point base = rel ? b.cursor : Point{0, 0};
    auto pt = [&] {
      const double x = scan.number();
      const double y = scan.number();
      return Point{base.x + x, base.y + y};
    };

    switch (std::toupper(static_cast<unsigned char>(cmd))) {
      case 'M':
        b.begin(pt());
        break;
      case 'L':
        b.add(Segment::line(pt()));
        break;
      case 'H': {
        const double x = scan.number();
        b.add(Segment::line({rel ? b.cursor.x + x : x, b.cursor.y}));
        break;
      }
      case 'V': {
        const double y = scan.number();
        b.add(Segment::line({b.cursor.x, rel ? b.cursor.y + y : y}));
        break;
      }
      case 'Q': {
        const Point c = pt();
        const Point p = pt();
        b.add(Segment::quad(c, p));
        b.last_ctrl = c;
        break;
      }
      case 'T': {
        const char prev = static_cast<char>(std::toupper(static_cast<unsigned char>(b.last_cmd)));
        const Point c = (prev == 'Q' || prev == 'T') ? 2.0 * b.cursor - b.last_ctrl : b.cursor;
        const Point p = pt();
        b.add(Segment::quad(c, p));
        b.last_ctrl = c;
        break;
      }
      case 'C': {
        const Point c1 = pt();
        const Point c2 = pt();
        const Point p = pt();
        b.add(Segment::cubic(c1, c2, p));
        b.last_ctrl = c2;
        break;
      }
      case 'S': {
        const char prev = static_cast<char>(std::toupper(static_cast<unsigned char>(b.last_cmd)));
        const Point c1 = (prev == 'C' || prev == 'S') ? 2.0 * b.cursor - b.last_ctrl : b.cursor;
        const Point c2 = pt();
        const Point p = pt();
        b.add(Segment::cubic(c1, c2, p));
        b.last_ctrl = c2;
        break;
      }
      case 'Z':
        b.finish();
        break;
      default:
        throw ParseError(std::string("unsupported path command '") + cmd + "'");
    }
    b.last_cmd = cmd;
  }
  b.finish();
  return std::move(b.contours);
}

namespace {

void append_number(std::string& out, double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void append_point(std::string& out, Point p) {
  out += ' ';
  append_number(out, p.x);
  out += ' ';
  append_number(out, p.y);
}

}  // namespace

std::string to_svg_path(const std::vector<Contour>& contours) {
  std::string out;
  for (const auto& c : contours) {
    if (!out.empty()) out += ' ';
    out += 'M';
    append_point(out, c.start);
    std::size_t n = c.segments.size();
    // A closing line back to the start is implied by Z.
    if (n > 1 && c.segments.back().kind == SegmentKind::Line && c.segments.back().end == c.start) --n;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = c.segments[i];
      switch (s.kind) {
        case SegmentKind::Line:
          out += " L";
          append_point(out, s.end);
          break;
        case SegmentKind::Quadratic:
          out += " Q";
          append_point(out, s.c1);
          append_point(out, s.end);
          break;
        case SegmentKind::Cubic:
          out += " C";
          append_point(out, s.c1);
          append_point(out, s.c2);
          append_point(out, s.end);
          break;
      }
    }
    out += " Z";
  }
  return out;
}

VectorGlyph apply_affine(const VectorGlyph& glyph, const ContentAffine& m) {
  if (!m.m.is_invertible()) throw NumericalError("apply_affine: singular content affine");
  VectorGlyph out;
  out.units_per_em = glyph.units_per_em;
  out.contours.reserve(glyph.contours.size());
  for (const auto& c : glyph.contours) {
    Contour t{m.m.apply(c.start), {}};
    t.segments.reserve(c.segments.size());
    for (const auto& s : c.segments) {
      Segment ts = s;
      if (s.kind != SegmentKind::Line) ts.c1 = m.m.apply(s.c1);
      if (s.kind == SegmentKind::Cubic) ts.c2 = m.m.apply(s.c2);
      ts.end = m.m.apply(s.end);
      t.segments.push_back(ts);
    }
    // Keep closure exact after rounding.
    if (!t.segments.empty() && c.segments.back().end == c.start) t.segments.back().end = t.start;
    out.contours.push_back(std::move(t));
  }
  return out;
}

VectorGlyph merge(const std::vector<VectorGlyph>& glyphs) {
  VectorGlyph out;
  if (glyphs.empty()) return out;
  out.units_per_em = glyphs.front().units_per_em;
  for (const auto& g : glyphs) {
    if (g.units_per_em != out.units_per_em) throw DataError("merge: mismatched units_per_em");
    out.contours.insert(out.contours.end(), g.contours.begin(), g.contours.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling-space <-> font-unit-space affines.
//
// N(p) = D p + o with D = diag(k, -k), k = 2/U. Conjugating by N only flips
// the sign of the off-diagonal terms of the linear block, so the identity
// passes through bit-exactly.

ContentAffine grid_to_content_affine(const GridAffine& theta, const RenderFrame& frame) {
  const AffineMatrix a = theta.m.inverse();  // content moves by the inverse sampling map
  const AffineMatrix n = frame.to_normalized();
  const double k = n.v[0];
  const double ox = n.v[2], oy = n.v[5];
  const auto& l = a.v;
  const double tx = ((l[0] - 1.0) * ox + l[1] * oy + l[2]) / k;
  const double ty = (l[3] * ox + (l[4] - 1.0) * oy + l[5]) / -k;
  return ContentAffine{{{l[0], -l[1], tx, -l[3], l[4], ty}}};
}

GridAffine content_to_grid_affine(const ContentAffine& m, const RenderFrame& frame) {
  const AffineMatrix n = frame.to_normalized();
  const double k = n.v[0];
  const double ox = n.v[2], oy = n.v[5];
  const auto& l = m.m.v;
  const double a00 = l[0], a01 = -l[1], a10 = -l[3], a11 = l[4];
  const double tx = (1.0 - a00) * ox - a01 * oy + k * l[2];
  const double ty = -a10 * ox + (1.0 - a11) * oy - k * l[5];
  const AffineMatrix a{{a00, a01, tx, a10, a11, ty}};
  return GridAffine{a.inverse()};
}

std::array<double, 6> content_to_editor_params(const ContentAffine& m, Point o) {
  const AffineMatrix local = AffineMatrix::translate(-o.x, -o.y) * m.m * AffineMatrix::translate(o.x, o.y);
  const auto& v = local.v;
  return {v[0], v[1], v[3], v[4], v[2], v[5]};
}

ContentAffine editor_params_to_content(const std::array<double, 6>& p, Point o) {
  const AffineMatrix local{{p[0], p[1], p[4], p[2], p[3], p[5]}};
  return ContentAffine{AffineMatrix::translate(o.x, o.y) * local * AffineMatrix::translate(-o.x, -o.y)};
}

}  // namespace glyphsmith
