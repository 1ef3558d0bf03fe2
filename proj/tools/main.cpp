#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace glyphsmith::cli;
  CLI::App app{"glyphsmith: compose vector glyphs from components with learned affines"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  CommandOptions o;
  std::string config, table, glyphs, checkpoint, chars, out, layout;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  app.add_option("--config", config, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--table", table, "Decomposition table");
  app.add_option("--glyphs", glyphs, "Glyph source: JSON set, SVG file or directory of SVGs");
  app.add_option("--checkpoint", checkpoint, "Model checkpoint");
  app.add_option("--chars", chars, "Characters: a file, or a list such as \"媒,U+67D0\"");
  app.add_option("--out", out, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  auto* n_opt = app.add_option("--n", n, "Sample count (synth)");
  app.add_option("--layout", layout, "Layout tag (synth)");

  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"stats", "Layout statistics, component frequency and coverage of a table"},
      {"render", "Render glyphs centered to PGM"},
      {"train", "Train a model on a synthetic dataset"},
      {"eval", "Evaluate a checkpoint on the validation split"},
      {"compose", "Compose characters from component glyphs"},
      {"extend", "Compose characters for another font without retraining"},
      {"gradcheck", "Finite-difference check of every backward pass"},
      {"synth", "Generate a synthetic composition dataset"},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (!config.empty()) o.config = config;
  if (!table.empty()) o.table = table;
  if (!glyphs.empty()) o.glyphs = glyphs;
  if (!checkpoint.empty()) o.checkpoint = checkpoint;
  if (!chars.empty()) o.chars = chars;
  if (!out.empty()) o.out = out;
  if (!layout.empty()) o.layout = layout;
  if (seed_opt->count() > 0) o.seed = seed;
  if (n_opt->count() > 0) o.n = n;

  const std::string name = app.get_subcommands().front()->get_name();
  return run_command(name, o, std::cout, std::cerr);
}
