#pragma once

#include <cstdint>

#include "glyphsmith/car_model.hpp"
#include "glyphsmith/grad_check.hpp"

namespace glyphsmith {

struct GradSuiteOptions {
  int seeds = 20;
  double tol = 1e-5;
  /// Tolerance of the end-to-end model checks.
  double model_tol = 1e-4;
  std::uint64_t base_seed = 1;
  bool include_model = true;
};

/// Miniature of the full architecture (16x16 input) used for end-to-end
/// gradient checks.
ModelConfig miniature_model_config(FusionMode fusion = FusionMode::Stack);

/// Finite-difference checks of every backward pass: warp, the four losses
/// and their weighted sum, the network primitives, both learned fusions and
/// the whole model on a miniature input. Entries with the same name are
/// merged across seeds.
GradCheckReport run_gradient_suite(const GradSuiteOptions& options = {});

}  // namespace glyphsmith
