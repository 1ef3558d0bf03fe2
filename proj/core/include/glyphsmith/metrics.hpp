#pragma once

#include <string>
#include <vector>

#include "glyphsmith/car_model.hpp"
#include "glyphsmith/compose.hpp"
#include "glyphsmith/geometry.hpp"
#include "glyphsmith/raster.hpp"
#include "glyphsmith/synthetic.hpp"

namespace glyphsmith {

/// Mean absolute error of clamp(S, 0, 1) against C.
double mae(const Raster& s, const Raster& c);
/// Root-mean-square error of clamp(S, 0, 1) against C.
double rmse(const Raster& s, const Raster& c);

/// Mean distance in pixels between the images of the four em-box corners
/// under two font-unit affines, at raster size `size`.
double corner_displacement_px(const ContentAffine& a, const ContentAffine& b, int size, double units_per_em);

struct SampleMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double baseline_mae = 0.0;
  double baseline_rmse = 0.0;
  double corner_px = 0.0;  // mean over components; 0 without ground truth
};

struct EvalReport {
  std::vector<SampleMetrics> samples;
  std::size_t count = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double baseline_mae = 0.0;   // identity composition: plain sum of inputs
  double baseline_rmse = 0.0;
  double corner_px = 0.0;
  bool has_truth = false;

  std::string to_text() const;
  std::string to_json() const;
};

/// Composes every sample with the model and scores it. Throws DataError on
/// an empty set.
EvalReport evaluate(const CarModel& model, const std::vector<TrainSample>& samples, double units_per_em = 1000.0);

/// Same, with the affines supplied per sample instead of regressed.
EvalReport evaluate_thetas(const std::vector<TrainSample>& samples, const std::vector<std::vector<GridAffine>>& thetas,
                           double units_per_em = 1000.0);

/// Sampling affines that reproduce the ground-truth placement of each
/// component of `sample`.
std::vector<GridAffine> oracle_thetas(const TrainSample& sample, double units_per_em = 1000.0);

struct IterativeReport {
  EvalReport report;                // corner_px compares leaf affines with the truth
  std::vector<double> reraster_iou; // composed outline rendered vs. the last step's raster
  double mean_iou = 0.0;
};

/// Composes every synthetic sample through its composition plan (pairwise
/// steps served by `models`) and scores the last step's raster against the
/// centered target at `size`. Leaves are named U+E000, U+E001, ...
IterativeReport evaluate_iterative(const ModelRegistry& models, const SyntheticDataset& data, int size);

}  // namespace glyphsmith
