#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glyphsmith/glyph.hpp"

namespace glyphsmith {

struct GlyphRecord {
  VectorGlyph glyph;
  double advance = 0.0;
};

/// A set of designed glyphs sharing one em size.
///
/// On disk this is a JSON document:
///
///   { "units_per_em": 1000,
///     "glyphs": { "女": { "advance": 1000, "d": "M ..." },
///                 "U+67D0": { "advance": 1000, "d": "M ..." } } }
///
/// Keys are either the character itself or its "U+XXXX" label. Path data is
/// in font units, y up.
struct GlyphSet {
  int units_per_em = 1000;
  std::map<char32_t, GlyphRecord> glyphs;

  const VectorGlyph* find(char32_t c) const;
  bool contains(char32_t c) const { return glyphs.count(c) != 0; }
};

GlyphSet parse_glyph_set(const std::string& json_text);
std::string serialize_glyph_set(const GlyphSet& set);

/// Loads a glyph set from a JSON file, a single SVG file, or a directory of
/// SVG files named by character or "U+XXXX".
GlyphSet load_glyph_source(const std::filesystem::path& path);
void save_glyph_set(const GlyphSet& set, const std::filesystem::path& path);

/// Reads the first <path d="..."> of an SVG document. The em size comes from
/// the viewBox height. Documents written by write_glyph_svg carry a y-flip
/// transform and are read back verbatim; other documents are treated as y-down
/// and flipped into font space.
VectorGlyph parse_glyph_svg(const std::string& svg_text, int default_units_per_em = 1000);

/// One glyph per SVG document, viewBox = em box, path data in font units.
std::string glyph_svg(const VectorGlyph& glyph);

struct ManifestComponent {
  char32_t component = 0;
  Point origin;                  // bbox left-bottom corner of the source glyph
  std::array<double, 6> params;  // editor order [s_x, k_x, k_y, s_y, t_x, t_y]
};

struct ManifestCharacter {
  char32_t character = 0;
  std::string layout;
  std::string svg_file;
  std::vector<ManifestComponent> components;
};

struct SkippedCharacter {
  char32_t character = 0;
  std::string reason;
};

struct ComposeManifest {
  int units_per_em = 1000;
  std::vector<ManifestCharacter> characters;
  std::vector<SkippedCharacter> skipped;

  std::string to_json() const;
};

}  // namespace glyphsmith
