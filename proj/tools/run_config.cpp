#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "glyphsmith/error.hpp"

namespace glyphsmith::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

class Value {
 public:
  Value(std::string key, std::string raw, int line) : key_(std::move(key)), raw_(std::move(raw)), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + key_ + ": " + what);
  }

  std::string str() const {
    if (raw_.size() >= 2 && raw_.front() == '"' && raw_.back() == '"') return raw_.substr(1, raw_.size() - 2);
    if (raw_.empty()) fail("empty value");
    return raw_;
  }

  double real() const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(raw_.data(), raw_.data() + raw_.size(), v);
    if (ec != std::errc{} || p != raw_.data() + raw_.size()) fail("expected a number, got '" + raw_ + "'");
    return v;
  }

  template <typename Int>
  Int integer(Int lo) const {
    Int v{};
    const auto [p, ec] = std::from_chars(raw_.data(), raw_.data() + raw_.size(), v);
    if (ec != std::errc{} || p != raw_.data() + raw_.size()) fail("expected an integer, got '" + raw_ + "'");
    if (v < lo) fail("must be at least " + std::to_string(lo));
    return v;
  }

  bool boolean() const {
    if (raw_ == "true") return true;
    if (raw_ == "false") return false;
    fail("expected true or false, got '" + raw_ + "'");
  }

  Layout layout() const {
    auto l = parse_layout(str());
    if (!l || l->kind == LayoutKind::TBD) fail("unknown layout '" + str() + "'");
    return *l;
  }

  std::vector<std::size_t> size_list() const {
    std::string body = raw_;
    if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
    std::vector<std::size_t> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      std::size_t v = 0;
      const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc{} || p != t.data() + t.size() || v == 0) fail("expected a list of positive integers");
      out.push_back(v);
    }
    if (out.empty()) fail("empty list");
    return out;
  }

  fs::path path(const fs::path& base) const {
    fs::path p = str();
    return p.is_relative() && !base.empty() ? base / p : p;
  }

 private:
  std::string key_;
  std::string raw_;
  int line_;
};

using Setter = std::function<void(RunConfig&, const Value&, const fs::path&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"table", [](RunConfig& c, const Value& v, const fs::path& b) { c.table = v.path(b); }},
      {"glyphs", [](RunConfig& c, const Value& v, const fs::path& b) { c.glyphs = v.path(b); }},
      {"dataset", [](RunConfig& c, const Value& v, const fs::path& b) { c.dataset = v.path(b); }},
      {"checkpoint", [](RunConfig& c, const Value& v, const fs::path& b) { c.checkpoint = v.path(b); }},
      {"init_checkpoint", [](RunConfig& c, const Value& v, const fs::path& b) { c.init_checkpoint = v.path(b); }},
      {"out", [](RunConfig& c, const Value& v, const fs::path& b) { c.out = v.path(b); }},
      {"split",
       [](RunConfig& c, const Value& v, const fs::path&) {
         c.split = v.real();
         if (!(c.split > 0.0 && c.split < 1.0)) v.fail("must lie in (0, 1)");
       }},
      {"train.layout", [](RunConfig& c, const Value& v, const fs::path&) { c.train.layout = v.layout(); }},
      {"train.lr", [](RunConfig& c, const Value& v, const fs::path&) { c.train.lr = v.real(); }},
      {"train.momentum", [](RunConfig& c, const Value& v, const fs::path&) { c.train.momentum = v.real(); }},
      {"train.epochs", [](RunConfig& c, const Value& v, const fs::path&) { c.train.epochs = v.integer(0); }},
      {"train.lr_step", [](RunConfig& c, const Value& v, const fs::path&) { c.train.lr_step = v.integer(1); }},
      {"train.batch_size",
       [](RunConfig& c, const Value& v, const fs::path&) { c.train.batch_size = v.integer<std::size_t>(1); }},
      {"train.seed", [](RunConfig& c, const Value& v, const fs::path&) { c.train.seed = v.integer<std::uint64_t>(0); }},
      {"train.rescale_weights",
       [](RunConfig& c, const Value& v, const fs::path&) { c.train.rescale_weights = v.boolean(); }},
      {"train.augment_flip", [](RunConfig& c, const Value& v, const fs::path&) { c.train.augment_flip = v.boolean(); }},
      {"train.grad_clip", [](RunConfig& c, const Value& v, const fs::path&) { c.train.grad_clip = v.real(); }},
      {"loss.pixel", [](RunConfig& c, const Value& v, const fs::path&) { c.train.weights.pixel = v.real(); }},
      {"loss.overlap", [](RunConfig& c, const Value& v, const fs::path&) { c.train.weights.overlap = v.real(); }},
      {"loss.centroid", [](RunConfig& c, const Value& v, const fs::path&) { c.train.weights.centroid = v.real(); }},
      {"loss.inertia", [](RunConfig& c, const Value& v, const fs::path&) { c.train.weights.inertia = v.real(); }},
      {"model.input_size", [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.input_size = v.integer(8); }},
      {"model.channels", [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.channels = v.size_list(); }},
      {"model.groups",
       [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.groups = v.integer<std::size_t>(1); }},
      {"model.hidden",
       [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.hidden = v.integer<std::size_t>(1); }},
      {"model.attention_dim",
       [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.attention_dim = v.integer<std::size_t>(1); }},
      {"model.fusion",
       [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.fusion = parse_fusion_mode(v.str()); }},
      {"model.switcher", [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.switcher = v.boolean(); }},
      {"model.components", [](RunConfig& c, const Value& v, const fs::path&) { c.train.model.components = v.integer(2); }},
      {"synth.seed", [](RunConfig& c, const Value& v, const fs::path&) { c.synth.seed = v.integer<std::uint64_t>(0); }},
      {"synth.n", [](RunConfig& c, const Value& v, const fs::path&) { c.synth.n = v.integer<std::size_t>(1); }},
      {"synth.layout", [](RunConfig& c, const Value& v, const fs::path&) { c.synth.layout = v.layout(); }},
      {"synth.units_per_em", [](RunConfig& c, const Value& v, const fs::path&) { c.synth.units_per_em = v.integer(16); }},
      {"render.size", [](RunConfig& c, const Value& v, const fs::path&) { c.render_size = v.integer(8); }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  RunConfig config;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    std::string key = trim(std::string_view(s).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(line) + ": duplicate key " + key);
    const Value value(key, trim(std::string_view(s).substr(eq + 1)), line);

    if (key.rfind("models.", 0) == 0) {
      const std::string tag = key.substr(7);
      auto l = parse_layout(tag);
      if (!l || l->kind == LayoutKind::TBD || l->kind == LayoutKind::NL00) value.fail("not a composable layout");
      config.models[layout_tag(*l)] = value.path(base_dir);
      continue;
    }
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(line) + ": unknown key " + key);
    try {
      it->second(config, value, base_dir);
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      value.fail(e.what());
    }
  }
  config.train.validate();
  return config;
}

void require_inputs_exist(const RunConfig& config) {
  auto check = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) throw ConfigError(std::string(what) + " not found: " + p->string());
  };
  check(config.table, "table");
  check(config.glyphs, "glyph source");
  check(config.dataset, "dataset");
  check(config.checkpoint, "checkpoint");
  check(config.init_checkpoint, "initial checkpoint");
  for (const auto& [tag, path] : config.models) check(path, ("model for " + tag).c_str());
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  RunConfig config = parse_run_config(os.str(), path.parent_path());
  require_inputs_exist(config);
  return config;
}

}  // namespace glyphsmith::cli
