#pragma once

#include "glyphsmith/raster.hpp"

namespace glyphsmith {

/// Weights of the composite objective: pixel, overlap, centroid, inertia.
struct LossWeights {
  double pixel = 1.0;
  double overlap = 1.0;
  double centroid = 0.0;
  double inertia = 0.0;

  /// Throws ConfigError unless all weights are >= 0 and one is > 0.
  void validate() const;
  /// Centroid scales with resolution R and inertia with R^4, so weights tuned
  /// at 256 px are rescaled by 256/R and (256/R)^4.
  LossWeights rescaled_for(int resolution) const;
  bool operator==(const LossWeights&) const = default;
};

struct LossValue {
  double value = 0.0;
  Raster grad;              // d value / d S
  bool degenerate = false;  // e.g. overlap of an all-zero image
};

/// Mean absolute difference. Subgradient 0 where S == C.
LossValue loss_pixel(const Raster& s, const Raster& c);

/// sum(min(max(S-1, 0), 1)) / sum(S).
LossValue loss_overlap(const Raster& s);

/// Half the L1 distance between centroids, in pixels.
LossValue loss_centroid(const Raster& s, const Raster& c);

/// |inertia(S) - inertia(C)|.
LossValue loss_inertia(const Raster& s, const Raster& c);

struct LossBreakdown {
  double pixel = 0.0;
  double overlap = 0.0;
  double centroid = 0.0;
  double inertia = 0.0;
  double total = 0.0;
  Raster grad;
};

/// Weighted sum of the four terms; terms with zero weight are skipped.
LossBreakdown loss_total(const Raster& s, const Raster& c, const LossWeights& w);

}  // namespace glyphsmith
