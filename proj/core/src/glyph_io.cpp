#include "glyphsmith/glyph_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "glyphsmith/error.hpp"
#include "glyphsmith/unicode.hpp"

namespace glyphsmith {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

char32_t key_to_char(const std::string& key) {
  if (auto cp = unicode::parse_codepoint_label(key)) return *cp;
  const auto scalars = unicode::decode(key);
  if (scalars.size() != 1) throw ParseError("glyph key '" + key + "' is neither one character nor U+XXXX");
  return scalars[0];
}

}  // namespace

const VectorGlyph* GlyphSet::find(char32_t c) const {
  auto it = glyphs.find(c);
  return it == glyphs.end() ? nullptr : &it->second.glyph;
}

GlyphSet parse_glyph_set(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("glyph set JSON: ") + e.what());
  }
  GlyphSet set;
  if (!j.contains("units_per_em") || !j["units_per_em"].is_number_integer()) {
    throw ParseError("glyph set: missing integer units_per_em");
  }
  set.units_per_em = j["units_per_em"].get<int>();
  if (set.units_per_em <= 0) throw ParseError("glyph set: units_per_em must be positive");
  if (!j.contains("glyphs") || !j["glyphs"].is_object()) throw ParseError("glyph set: missing glyphs object");
  for (const auto& [key, value] : j["glyphs"].items()) {
    GlyphRecord rec;
    rec.glyph.units_per_em = set.units_per_em;
    rec.advance = value.value("advance", static_cast<double>(set.units_per_em));
    const std::string d = value.value("d", std::string());
    if (!d.empty()) rec.glyph.contours = parse_svg_path(d);
    set.glyphs[key_to_char(key)] = std::move(rec);
  }
  return set;
}

std::string serialize_glyph_set(const GlyphSet& set) {
  json j;
  j["units_per_em"] = set.units_per_em;
  j["glyphs"] = json::object();
  for (const auto& [c, rec] : set.glyphs) {
    j["glyphs"][unicode::encode(c)] = {{"advance", rec.advance}, {"d", to_svg_path(rec.glyph.contours)}};
  }
  return j.dump(2);
}

void save_glyph_set(const GlyphSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_glyph_set(set) << '\n';
}

VectorGlyph parse_glyph_svg(const std::string& svg, int default_units_per_em) {
  static const std::regex path_re(R"(<path\b([^>]*)>)", std::regex::icase);
  static const std::regex d_re(R"(\bd\s*=\s*["']([^"']*)["'])");
  static const std::regex transform_re(R"(\btransform\s*=\s*["']([^"']*)["'])");
  static const std::regex viewbox_re(R"(viewBox\s*=\s*["']\s*([-\d.eE+]+)[\s,]+([-\d.eE+]+)[\s,]+([-\d.eE+]+)[\s,]+([-\d.eE+]+)\s*["'])");

  VectorGlyph glyph;
  glyph.units_per_em = default_units_per_em;
  double view_height = default_units_per_em;
  std::smatch m;
  if (std::regex_search(svg, m, viewbox_re)) {
    view_height = std::stod(m[4].str());
    glyph.units_per_em = static_cast<int>(std::lround(view_height));
  }
  if (!std::regex_search(svg, m, path_re)) throw ParseError("SVG document has no <path> element");
  const std::string attrs = m[1].str();
  std::smatch dm;
  if (!std::regex_search(attrs, dm, d_re)) throw ParseError("SVG <path> has no d attribute");
  glyph.contours = parse_svg_path(dm[1].str());

  std::smatch tm;
  const bool font_space = std::regex_search(attrs, tm, transform_re) &&
                          tm[1].str().find("matrix(1 0 0 -1") != std::string::npos;
  if (!font_space) {
    const ContentAffine flip{AffineMatrix{{1, 0, 0, 0, -1, view_height}}};
    glyph = apply_affine(glyph, flip);
  }
  return glyph;
}

std::string glyph_svg(const VectorGlyph& glyph) {
  const auto u = std::to_string(glyph.units_per_em);
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + u + " " + u + "\">\n";
  s += "  <path d=\"" + to_svg_path(glyph.contours) + "\" transform=\"matrix(1 0 0 -1 0 " + u + ")\"/>\n";
  s += "</svg>\n";
  return s;
}

GlyphSet load_glyph_source(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    GlyphSet set;
    bool first = true;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".svg") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      VectorGlyph g = parse_glyph_svg(read_file(f));
      if (first) {
        set.units_per_em = g.units_per_em;
        first = false;
      } else if (g.units_per_em != set.units_per_em) {
        throw DataError("glyph directory mixes em sizes: " + f.string());
      }
      const double adv = g.units_per_em;
      set.glyphs[key_to_char(f.stem().string())] = GlyphRecord{std::move(g), adv};
    }
    return set;
  }
  const std::string text = read_file(path);
  if (path.extension() == ".svg") {
    GlyphSet set;
    VectorGlyph g = parse_glyph_svg(text);
    set.units_per_em = g.units_per_em;
    const double adv = g.units_per_em;
    set.glyphs[key_to_char(path.stem().string())] = GlyphRecord{std::move(g), adv};
    return set;
  }
  return parse_glyph_set(text);
}

std::string ComposeManifest::to_json() const {
  json j;
  j["units_per_em"] = units_per_em;
  j["convention"] = "editor order [s_x, k_x, k_y, s_y, t_x, t_y] about component bbox left-bottom";
  j["characters"] = json::array();
  for (const auto& ch : characters) {
    json jc;
    jc["char"] = unicode::encode(ch.character);
    jc["codepoint"] = unicode::codepoint_label(ch.character);
    jc["layout"] = ch.layout;
    jc["svg"] = ch.svg_file;
    jc["components"] = json::array();
    for (const auto& comp : ch.components) {
      json p = json::array();
      for (double v : comp.params) p.push_back(v);
      jc["components"].push_back({{"char", unicode::encode(comp.component)},
                                  {"codepoint", unicode::codepoint_label(comp.component)},
                                  {"origin", {comp.origin.x, comp.origin.y}},
                                  {"params", p}});
    }
    j["characters"].push_back(jc);
  }
  j["skipped"] = json::array();
  for (const auto& s : skipped) {
    j["skipped"].push_back(
        {{"char", unicode::encode(s.character)}, {"codepoint", unicode::codepoint_label(s.character)}, {"reason", s.reason}});
  }
  return j.dump(2);
}

}  // namespace glyphsmith
