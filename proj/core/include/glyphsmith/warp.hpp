#pragma once

#include <array>

#include "glyphsmith/geometry.hpp"
#include "glyphsmith/raster.hpp"

namespace glyphsmith {

/// Bilinear affine resampling (the spatial-transformer sampler). Output pixel
/// (j, i) sits at normalized (x_n, y_n) = ((2j+1)/W - 1, (2i+1)/H - 1); it
/// reads the input at theta * (x_n, y_n, 1). Taps outside the image read 0.
Raster warp_forward(const Raster& image, const GridAffine& theta);

struct WarpGradients {
  Raster d_image;
  std::array<double, 6> d_theta{};
};

/// Gradients of sum(d_out * warp_forward(image, theta)).
WarpGradients warp_backward(const Raster& image, const GridAffine& theta, const Raster& d_out,
                            bool need_image_grad = true);

}  // namespace glyphsmith
