#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "glyphsmith/geometry.hpp"
#include "glyphsmith/losses.hpp"
#include "glyphsmith/raster.hpp"
#include "glyphsmith/tensor.hpp"

namespace glyphsmith {

enum class FusionMode { Stack, AdaIN, Attention };

std::string fusion_mode_name(FusionMode mode);
/// "stack", "adain" or "attention"; throws ConfigError otherwise.
FusionMode parse_fusion_mode(const std::string& name);

struct ModelConfig {
  int input_size = 64;
  std::vector<std::size_t> channels{16, 32, 64, 128};
  std::size_t groups = 8;
  std::size_t hidden = 256;
  std::size_t attention_dim = 128;
  FusionMode fusion = FusionMode::Stack;
  bool switcher = false;
  int components = 2;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  /// Spatial side of the extractor output.
  std::size_t feature_side() const;
  std::size_t feature_channels() const { return channels.back(); }
  /// Length of the flattened fused feature fed to the regressor.
  std::size_t fused_size() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Compact JSON object with every ModelConfig field.
std::string model_config_json(const ModelConfig& config);
/// Throws FormatError on missing or mistyped fields.
ModelConfig parse_model_config_json(const std::string& text);

// ---------------------------------------------------------------------------
// Fusion operators on [C, h, w] feature maps.

/// Channel concatenation (self first, then the others in order).
Tensor fuse_stack(const Tensor& self, const std::vector<const Tensor*>& others);
Tensor fuse_stack(const Tensor& self, const Tensor& other);

inline constexpr double kAdaINEpsilon = 1e-5;

/// sigma(other) * (self - mu(self)) / (sigma(self) + eps) + mu(other), with
/// per-channel population statistics over spatial positions.
Tensor fuse_adain(const Tensor& self, const Tensor& other);
struct FusionGrads {
  Tensor d_self, d_other;
};
FusionGrads fuse_adain_backward(const Tensor& self, const Tensor& other, const Tensor& d_out);

/// Projections for cross-attention; weights are [d, C], biases [d].
struct AttentionParams {
  Tensor wq, bq, wk, bk, wv, bv;
};

/// softmax(Q K^T / sqrt(d)) V with Q from self and K, V from other. Feature
/// maps are read as h*w tokens of C channels; the result is [h*w, d].
Tensor fuse_attention(const Tensor& self, const Tensor& other, const AttentionParams& p);
struct AttentionGrads {
  Tensor d_self, d_other;
  AttentionParams d_params;
};
AttentionGrads fuse_attention_backward(const Tensor& self, const Tensor& other, const AttentionParams& p,
                                       const Tensor& d_out);

// ---------------------------------------------------------------------------
// Switcher: constant 6x6 matrix with ones at (0,4), (4,0), (2,5), (5,2).

std::array<std::array<double, 6>, 6> switcher_matrix();
std::array<double, 6> apply_switcher(const std::array<double, 6>& v);

// ---------------------------------------------------------------------------

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct ComposeResult {
  std::vector<GridAffine> thetas;
  Raster composed;  // unclamped sum of warped components
};

/// Per-parameter gradient buffers, in the model's parameter order.
using ParamGrads = std::vector<Tensor>;

/// The component affine regressor: shared extractor, fusion, MLP regressor.
class CarModel {
 public:
  /// Freshly initialized model. Uniform fan-in init from `seed` for
  /// extractor and hidden layers; the last layer is W = 0, b = identity.
  explicit CarModel(ModelConfig config, std::uint64_t seed = 30);

  const ModelConfig& config() const { return config_; }
  void set_switcher(bool enabled) { config_.switcher = enabled; }

  std::vector<NamedTensor>& parameters() { return params_; }
  const std::vector<NamedTensor>& parameters() const { return params_; }
  /// Throws ShapeError for unknown names.
  Tensor& parameter(const std::string& name);
  const Tensor& parameter(const std::string& name) const;
  ParamGrads zero_grads() const;
  std::size_t parameter_count() const;

  /// [C, s, s] features of one component raster.
  Tensor extract_features(const Raster& image) const;

  /// One affine per component image.
  std::vector<GridAffine> regress_affines(const std::vector<Raster>& images) const;

  /// Regress, warp each component and sum.
  ComposeResult forward_compose(const std::vector<Raster>& images) const;

  /// loss_total(forward_compose(images).composed, target, weights); adds
  /// d loss / d params into `grads` when non-null.
  LossBreakdown loss_and_gradient(const std::vector<Raster>& images, const Raster& target,
                                  const LossWeights& weights, ParamGrads* grads) const;

  /// Backpropagates d loss / d theta (one 6-vector per component) into
  /// `grads`.
  void backward_from_thetas(const std::vector<Raster>& images, const std::vector<std::array<double, 6>>& d_thetas,
                            ParamGrads& grads) const;

 private:
  struct BlockIndex {
    std::size_t conv_w, conv_b, norm_scale, norm_shift;
  };
  struct Forward;

  Forward run_forward(const std::vector<Raster>& images, bool keep_cache) const;
  void run_backward(const Forward& fw, const std::vector<std::array<double, 6>>& d_thetas, ParamGrads& grads) const;
  std::size_t add(std::string name, Tensor value);
  AttentionParams attention_params() const;

  ModelConfig config_;
  std::vector<NamedTensor> params_;
  std::vector<BlockIndex> blocks_;
  std::array<std::size_t, 6> attention_{};
  std::vector<std::size_t> regressor_;  // weight, bias pairs
};

}  // namespace glyphsmith
