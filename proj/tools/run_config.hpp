#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "glyphsmith/decomp_table.hpp"
#include "glyphsmith/trainer.hpp"

namespace glyphsmith::cli {

struct SynthOptions {
  std::uint64_t seed = 30;
  std::size_t n = 600;
  Layout layout{LayoutKind::NL01, std::nullopt};
  int units_per_em = 1000;
};

/// Flat key = value file. `[section]` headers prefix the keys that follow
/// them, so `[train]\nlr = 0.002` and `train.lr = 0.002` are the same.
/// Relative paths resolve against the directory of the file.
///
///   table, glyphs, dataset, checkpoint, init_checkpoint, out   paths
///   split                                                      train fraction
///   train.{layout, lr, momentum, epochs, lr_step, batch_size, seed,
///          rescale_weights, augment_flip}
///   loss.{pixel, overlap, centroid, inertia}
///   model.{input_size, channels, groups, hidden, attention_dim, fusion,
///          switcher, components}
///   models.<layout tag>                                        checkpoint per layout
///   synth.{seed, n, layout, units_per_em}
///   render.size
struct RunConfig {
  std::optional<std::filesystem::path> table;
  std::optional<std::filesystem::path> glyphs;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> init_checkpoint;
  std::optional<std::filesystem::path> out;
  double split = 0.8;
  TrainConfig train;
  std::map<std::string, std::filesystem::path> models;
  SynthOptions synth;
  int render_size = 256;
};

/// Throws ConfigError (with line number) on syntax errors, unknown keys and
/// bad values. Does not touch the file system.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads and parses `path`, then requires every input path to exist.
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first input path that does not exist.
void require_inputs_exist(const RunConfig& config);

}  // namespace glyphsmith::cli
