#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "glyphsmith/car_model.hpp"

namespace glyphsmith {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string layout = "NL01";
  int epoch = 0;
  double lr = 0.0;
  std::uint64_t rng_state = 0;
  /// Free-form JSON object echoing the training configuration; may be empty.
  std::string train_config;
};

struct LoadedCheckpoint {
  CarModel model;
  CheckpointMeta meta;
};

/// Text header followed by the raw parameters:
///
///   GLYPHSMITH-CKPT
///   version 1
///   layout NL01
///   epoch 42
///   lr 3.125e-05
///   rng <state>
///   model {...}
///   train {...}
///   tensor <name> <d0> <d1> ...     (one line per parameter, model order)
///   payload <count>
///   <count little-endian IEEE-754 binary64 values>
std::string serialize_checkpoint(const CarModel& model, const CheckpointMeta& meta);
/// Throws FormatError on bad magic, version, manifest or truncated payload.
LoadedCheckpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const CarModel& model, const CheckpointMeta& meta, const std::filesystem::path& path);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace glyphsmith
