#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glyphsmith/decomp_table.hpp"
#include "glyphsmith/glyph.hpp"
#include "glyphsmith/raster.hpp"

namespace glyphsmith {

struct SyntheticSample {
  std::vector<VectorGlyph> components;
  /// Font-unit transforms placing each component in `target`.
  std::vector<ContentAffine> truth;
  VectorGlyph target;
};

struct SyntheticDataset {
  Layout layout;
  int units_per_em = 1000;
  std::uint64_t seed = 0;
  std::vector<SyntheticSample> samples;
};

/// Random component shapes (strokes, convex polygons, round dots) composed
/// with layout-specific affines. Supported layouts: NL01, NL02, NL03-k,
/// NL04, NL05. Placement parameters are functions of the component
/// extents, so they can be recovered from the component images alone.
SyntheticDataset generate_synthetic(std::uint64_t seed, std::size_t n, const Layout& layout, int units_per_em = 1000);

std::string serialize_dataset(const SyntheticDataset& data);
SyntheticDataset parse_dataset(const std::string& json_text);
void save_dataset(const SyntheticDataset& data, const std::filesystem::path& path);
SyntheticDataset load_dataset(const std::filesystem::path& path);

/// A dataset sample rendered for the model: centered component rasters,
/// centered target raster, and the ground truth re-expressed in raster space.
struct TrainSample {
  std::vector<Raster> components;
  Raster target;
  std::vector<Point> shifts;  // centering shift of each component render
  Point target_shift;
  /// translate(target_shift) * truth[k]: where component k must land in the
  /// unshifted frame of the target raster.
  std::vector<ContentAffine> truth;
};

std::vector<TrainSample> rasterize_dataset(const SyntheticDataset& data, int input_size);

}  // namespace glyphsmith
