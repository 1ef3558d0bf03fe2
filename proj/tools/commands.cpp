#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "glyphsmith/checkpoint.hpp"
#include "glyphsmith/compose.hpp"
#include "glyphsmith/error.hpp"
#include "glyphsmith/glyph_io.hpp"
#include "glyphsmith/grad_suite.hpp"
#include "glyphsmith/metrics.hpp"
#include "glyphsmith/raster.hpp"
#include "glyphsmith/synthetic.hpp"
#include "glyphsmith/unicode.hpp"

namespace glyphsmith::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

fs::path output_dir(const RunConfig& config) {
  if (!config.out) throw ConfigError("an output directory is required (--out or out = ...)");
  fs::create_directories(*config.out);
  return *config.out;
}

template <typename T>
const T& require(const std::optional<T>& value, const char* what) {
  if (!value) throw ConfigError(std::string(what) + " is required");
  return *value;
}

std::vector<DecompEntry> load_table(const RunConfig& config) {
  return parse_table(read_text(require(config.table, "a decomposition table (--table)")));
}

std::string label(char32_t c) { return unicode::codepoint_label(c); }

std::string describe(char32_t c) { return unicode::encode(c) + " " + label(c); }

struct Registry {
  std::vector<std::unique_ptr<CarModel>> owned;
  ModelRegistry models;
};

// models.<tag> entries first, then --checkpoint under the layout it was
// trained on, which wins on a clash.
Registry load_registry(const RunConfig& config) {
  Registry r;
  for (const auto& [tag, path] : config.models) {
    r.owned.push_back(std::make_unique<CarModel>(load_checkpoint(path).model));
    r.models.add(tag, r.owned.back().get());
  }
  if (config.checkpoint) {
    LoadedCheckpoint c = load_checkpoint(*config.checkpoint);
    r.owned.push_back(std::make_unique<CarModel>(std::move(c.model)));
    r.models.add(c.meta.layout, r.owned.back().get());
  }
  if (r.models.empty()) throw ConfigError("no model given (--checkpoint or models.<layout> = ...)");
  return r;
}

struct ComposeSummary {
  std::size_t composed = 0;
  std::vector<SkippedCharacter> skipped;
};

ComposeSummary compose_characters(const RunConfig& config, const std::vector<DecompEntry>& table, const GlyphSet& glyphs,
                                  const Registry& registry, const std::vector<char32_t>& chars, const fs::path& dir,
                                  std::ostream& out) {
  std::map<char32_t, const DecompEntry*> rows;
  for (const auto& e : table) rows.emplace(e.hanzi, &e);

  ComposeManifest manifest;
  manifest.units_per_em = glyphs.units_per_em;
  ComposeSummary summary;
  auto skip = [&](char32_t c, std::string reason) {
    out << "skip " << describe(c) << ": " << reason << "\n";
    manifest.skipped.push_back({c, reason});
  };

  for (char32_t c : chars) {
    auto row = rows.find(c);
    if (row == rows.end()) {
      skip(c, "not in table");
      continue;
    }
    const DecompEntry& entry = *row->second;
    if (entry.unannotated()) {
      skip(c, "unannotated layout");
      continue;
    }
    if (entry.layout.kind == LayoutKind::NL00) {
      skip(c, "isolated character has no components");
      continue;
    }
    const CompositionPlan plan = expand_nested(entry);
    std::string missing;
    for (char32_t leaf : distinct_leaves(entry)) {
      if (!glyphs.contains(leaf)) missing += (missing.empty() ? "" : " ") + describe(leaf);
    }
    if (!missing.empty()) {
      skip(c, "missing components: " + missing);
      continue;
    }
    std::string no_model;
    for (const auto& step : plan.steps) {
      if (!registry.models.find(step.layout)) no_model = layout_tag(step.layout);
    }
    if (!no_model.empty()) {
      skip(c, "no model for " + no_model);
      continue;
    }

    const CompositionResult result =
        iterative_compose(registry.models, plan, [&](char32_t leaf) { return glyphs.find(leaf); });
    const std::string file = label(c) + ".svg";
    const std::string svg = glyph_svg(result.glyph);
    // The written outline must read back.
    parse_svg_path(to_svg_path(result.glyph.contours));
    write_text(dir / file, svg);
    write_pgm(render(result.glyph, RenderFrame{config.render_size, static_cast<double>(glyphs.units_per_em), 0, 0},
                     false)
                  .raster,
              dir / (label(c) + ".pgm"));

    ManifestCharacter mc{c, layout_tag(entry.layout), file, {}};
    const double tol = glyphs.units_per_em / 2000.0;
    for (const auto& leaf : result.leaves) {
      const BoundingBox box = outline_bbox(*glyphs.find(leaf.leaf), tol);
      const Point origin{box.xmin, box.ymin};
      mc.components.push_back({leaf.leaf, origin, content_to_editor_params(leaf.affine, origin)});
    }
    manifest.characters.push_back(std::move(mc));
    ++summary.composed;
    out << "composed " << describe(c) << " -> " << file << "\n";
  }
  write_text(dir / "manifest.json", manifest.to_json() + "\n");
  summary.skipped = manifest.skipped;
  out << "composed=" << summary.composed << " skipped=" << summary.skipped.size() << "\n";
  return summary;
}

std::vector<char32_t> all_composable(const std::vector<DecompEntry>& table) {
  std::vector<char32_t> out;
  for (const auto& e : table) {
    if (!e.unannotated() && e.layout.kind != LayoutKind::NL00) out.push_back(e.hanzi);
  }
  return out;
}

struct SplitData {
  SyntheticDataset dataset;
  std::vector<TrainSample> train, val;
  SplitIndices indices;
};

SplitData load_split(const RunConfig& config, int input_size) {
  SplitData d;
  d.dataset = load_dataset(require(config.dataset, "a synthetic dataset (dataset = ...)"));
  const std::vector<TrainSample> samples = rasterize_dataset(d.dataset, input_size);
  d.indices = split_indices(samples.size(), config.split, config.train.seed);
  for (auto i : d.indices.train) d.train.push_back(samples[i]);
  for (auto i : d.indices.val) d.val.push_back(samples[i]);
  return d;
}

}  // namespace

std::vector<char32_t> parse_char_list(const std::string& arg) {
  const std::string text = fs::is_regular_file(arg) ? read_text(arg) : arg;
  std::vector<char32_t> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (auto cp = unicode::parse_codepoint_label(token)) {
      out.push_back(*cp);
    } else {
      for (char32_t c : unicode::decode(token)) out.push_back(c);
    }
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      flush();
    } else {
      token += ch;
    }
  }
  flush();
  return out;
}

RunConfig resolve_config(const CommandOptions& o) {
  RunConfig c = o.config ? load_run_config(*o.config) : RunConfig{};
  if (o.table) c.table = *o.table;
  if (o.glyphs) c.glyphs = *o.glyphs;
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
  if (o.out) c.out = *o.out;
  if (o.seed) c.train.seed = c.synth.seed = *o.seed;
  if (o.n) {
    if (*o.n == 0) throw ConfigError("--n must be positive");
    c.synth.n = *o.n;
  }
  if (o.layout) {
    auto l = parse_layout(*o.layout);
    if (!l || l->kind == LayoutKind::TBD || l->kind == LayoutKind::NL00) {
      throw ConfigError("unknown layout '" + *o.layout + "'");
    }
    c.synth.layout = *l;
  }
  require_inputs_exist(c);
  return c;
}

int cmd_stats(const RunConfig& config, std::ostream& out) {
  const auto table = load_table(config);
  std::set<char32_t> rows, external;
  for (const auto& e : table) rows.insert(e.hanzi);
  for (const auto& e : table) {
    for (char32_t leaf : distinct_leaves(e)) {
      if (!rows.count(leaf)) external.insert(leaf);
    }
  }
  const ValidationReport report = validate(table, external);
  const LayoutStats stats = layout_stats(table);
  const auto freq = component_frequency(table);
  const auto flat = coverage_curve(table, false);
  const auto recursive = coverage_curve(table, true);

  out << "rows=" << stats.total << " unannotated=" << stats.unannotated << "\n";
  for (const auto& [layout, count] : stats.by_layout) out << "layout " << layout_tag(layout) << " " << count << "\n";
  for (const auto& [v, count] : stats.nl03_variations) out << "variation NL03-" << v << " " << count << "\n";
  for (const auto& [layout, count] : stats.nested_by_layout) out << "nested " << layout_tag(layout) << " " << count << "\n";
  const std::size_t top = std::min<std::size_t>(10, freq.size());
  for (std::size_t i = 0; i < top; ++i) {
    out << "component " << describe(freq[i].component) << " " << freq[i].characters << "\n";
  }
  if (!flat.empty()) {
    out << "coverage components=" << flat.back().components << " chars=" << flat.back().characters
        << " recursive_chars=" << recursive.back().characters << "\n";
  }
  out << "violations=" << report.violations.size() << " external_components=" << report.external_components.size()
      << "\n";
  out << report.to_text();

  if (config.out) {
    const fs::path dir = output_dir(config);
    json j;
    j["rows"] = stats.total;
    j["unannotated"] = stats.unannotated;
    for (const auto& [layout, count] : stats.by_layout) j["layouts"][layout_tag(layout)] = count;
    for (const auto& [v, count] : stats.nl03_variations) j["nl03_variations"][std::to_string(v)] = count;
    for (const auto& [layout, count] : stats.nested_by_layout) j["nested"][layout_tag(layout)] = count;
    write_text(dir / "stats.json", j.dump(2) + "\n");
    std::string tsv = "component\tcodepoint\tcharacters\n";
    for (const auto& f : freq) {
      tsv += unicode::encode(f.component) + "\t" + label(f.component) + "\t" + std::to_string(f.characters) + "\n";
    }
    write_text(dir / "frequency.tsv", tsv);
    std::string cov = "components\tcharacters\trecursive_characters\n";
    for (std::size_t i = 0; i < flat.size(); ++i) {
      cov += std::to_string(flat[i].components) + "\t" + std::to_string(flat[i].characters) + "\t" +
             std::to_string(recursive[i].characters) + "\n";
    }
    write_text(dir / "coverage.tsv", cov);
    write_text(dir / "validation.json", report.to_json() + "\n");
  }
  return kOk;
}

int cmd_render(const RunConfig& config, const std::vector<char32_t>& chars, std::ostream& out) {
  const GlyphSet glyphs = load_glyph_source(require(config.glyphs, "a glyph source (--glyphs)"));
  std::vector<char32_t> wanted = chars;
  if (wanted.empty() && config.table) {
    std::set<char32_t> leaves;
    for (const auto& e : load_table(config)) {
      for (char32_t c : distinct_leaves(e)) leaves.insert(c);
    }
    wanted.assign(leaves.begin(), leaves.end());
  }
  if (wanted.empty()) {
    for (const auto& [c, rec] : glyphs.glyphs) wanted.push_back(c);
  }
  const fs::path dir = output_dir(config);
  const RenderFrame frame{config.render_size, static_cast<double>(glyphs.units_per_em), 0, 0};
  std::string index = "char\tcodepoint\tfile\tink\n";
  std::size_t rendered = 0;
  for (char32_t c : wanted) {
    const VectorGlyph* g = glyphs.find(c);
    if (!g) {
      out << "skip " << describe(c) << ": no glyph\n";
      continue;
    }
    const RenderResult r = render(*g, frame, true);
    const std::string file = label(c) + ".pgm";
    write_pgm(r.raster, dir / file);
    char ink[32];
    std::snprintf(ink, sizeof ink, "%.4f", r.raster.sum());
    index += unicode::encode(c) + "\t" + label(c) + "\t" + file + "\t" + ink + "\n";
    ++rendered;
  }
  write_text(dir / "index.tsv", index);
  out << "rendered=" << rendered << " size=" << config.render_size << "\n";
  return kOk;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  const fs::path dir = output_dir(config);
  const SynthOptions& s = config.synth;
  const SyntheticDataset data = generate_synthetic(s.seed, s.n, s.layout, s.units_per_em);
  const fs::path file = dir / ("synthetic_" + layout_tag(s.layout) + ".json");
  save_dataset(data, file);
  out << "wrote " << data.samples.size() << " " << layout_tag(s.layout) << " samples (seed " << s.seed << ") to "
      << file.string() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& config_in, std::ostream& out) {
  RunConfig config = config_in;
  std::optional<LoadedCheckpoint> init;
  if (config.init_checkpoint) {
    init = load_checkpoint(*config.init_checkpoint);
    const bool switcher = config.train.model.switcher;
    config.train.model = init->model.config();
    config.train.model.switcher = switcher;
  }
  const fs::path dir = output_dir(config);
  SplitData d = load_split(config, config.train.model.input_size);
  config.train.layout = d.dataset.layout;
  config.train.model.components = config.train.layout.arity();
  if (init && init->model.config().components != config.train.model.components) {
    throw DataError("initial checkpoint has a different component count than the dataset");
  }

  json split;
  split["train"] = d.indices.train;
  split["val"] = d.indices.val;
  write_text(dir / "split.json", split.dump() + "\n");

  std::ofstream log(dir / "train_log.txt", std::ios::binary);
  if (!log) throw DataError("cannot write " + (dir / "train_log.txt").string());
  const TrainResult r = train(config.train, d.train, d.val, init ? &init->model : nullptr,
                              [&](const EpochLog& e, const CarModel&) {
                                const std::string line = format_epoch_log(e);
                                out << line << "\n" << std::flush;
                                log << line << "\n";
                              });
  CheckpointMeta meta;
  meta.layout = layout_tag(config.train.layout);
  meta.epoch = r.epochs_run;
  meta.lr = r.final_lr;
  meta.rng_state = r.rng_state;
  meta.train_config = config.train.to_json();
  save_checkpoint(r.model, meta, dir / "model.ckpt");
  out << "baseline_val_mae=" << r.baseline_val_mae << "\n";
  if (!d.val.empty()) {
    const EvalReport report = evaluate(r.model, d.val, d.dataset.units_per_em);
    out << report.to_text();
    write_text(dir / "eval.json", report.to_json() + "\n");
  }
  out << "checkpoint " << (dir / "model.ckpt").string() << "\n";
  return kOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  EvalReport report;
  if (!config.checkpoint && !config.models.empty()) {
    // Three-component sets composed step by step with pairwise models.
    const Registry registry = load_registry(config);
    const CarModel* any = registry.owned.front().get();
    const SyntheticDataset full = load_dataset(require(config.dataset, "a synthetic dataset (dataset = ...)"));
    const SplitIndices idx = split_indices(full.samples.size(), config.split, config.train.seed);
    SyntheticDataset val = full;
    val.samples.clear();
    for (auto i : idx.val) val.samples.push_back(full.samples[i]);
    const IterativeReport it = evaluate_iterative(registry.models, val, any->config().input_size);
    report = it.report;
    char buf[64];
    std::snprintf(buf, sizeof buf, "reraster_iou=%.4f\n", it.mean_iou);
    out << buf;
  } else {
    const LoadedCheckpoint ckpt = load_checkpoint(require(config.checkpoint, "a checkpoint (--checkpoint)"));
    const SplitData d = load_split(config, ckpt.model.config().input_size);
    if (d.dataset.layout.arity() != ckpt.model.config().components) {
      throw DataError("checkpoint expects " + std::to_string(ckpt.model.config().components) +
                      " components, dataset has " + std::to_string(d.dataset.layout.arity()));
    }
    report = evaluate(ckpt.model, d.val, d.dataset.units_per_em);
  }
  out << report.to_text();
  if (config.out) write_text(output_dir(config) / "eval.json", report.to_json() + "\n");
  return kOk;
}

int cmd_compose(const RunConfig& config, const std::vector<char32_t>& chars, std::ostream& out) {
  const auto table = load_table(config);
  const GlyphSet glyphs = load_glyph_source(require(config.glyphs, "a glyph source (--glyphs)"));
  const Registry registry = load_registry(config);
  const fs::path dir = output_dir(config);
  compose_characters(config, table, glyphs, registry, chars.empty() ? all_composable(table) : chars, dir, out);
  return kOk;
}

int cmd_extend(const RunConfig& config, const std::vector<char32_t>& chars, std::ostream& out) {
  const auto table = load_table(config);
  const GlyphSet glyphs = load_glyph_source(require(config.glyphs, "a target glyph source (--glyphs)"));
  const Registry registry = load_registry(config);
  const fs::path dir = output_dir(config);
  std::vector<char32_t> wanted = chars;
  if (wanted.empty()) {
    // Everything the target font lacks.
    for (char32_t c : all_composable(table)) {
      if (!glyphs.contains(c)) wanted.push_back(c);
    }
  }
  const ComposeSummary s = compose_characters(config, table, glyphs, registry, wanted, dir, out);
  std::string report = "requested=" + std::to_string(wanted.size()) + " composed=" + std::to_string(s.composed) +
                       " skipped=" + std::to_string(s.skipped.size()) + "\n";
  for (const auto& k : s.skipped) report += describe(k.character) + "\t" + k.reason + "\n";
  write_text(dir / "extend_report.txt", report);
  return kOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  GradSuiteOptions options;
  options.base_seed = config.train.seed;
  const GradCheckReport report = run_gradient_suite(options);
  const std::string text = report.to_text();
  out << text;
  if (config.out) write_text(output_dir(config) / "gradcheck.txt", text);
  return report.passed() ? kOk : kNumerical;
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig config = resolve_config(options);
    const std::vector<char32_t> chars = options.chars ? parse_char_list(*options.chars) : std::vector<char32_t>{};
    if (name == "stats") return cmd_stats(config, out);
    if (name == "render") return cmd_render(config, chars, out);
    if (name == "train") return cmd_train(config, out);
    if (name == "eval") return cmd_eval(config, out);
    if (name == "compose") return cmd_compose(config, chars, out);
    if (name == "extend") return cmd_extend(config, chars, out);
    if (name == "gradcheck") return cmd_gradcheck(config, out);
    if (name == "synth") return cmd_synth(config, out);
    err << "error: unknown command '" << name << "'\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace glyphsmith::cli
