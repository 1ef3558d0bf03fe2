#include "glyphsmith/car_model.hpp"

#include <cmath>

#include <Eigen/Core>
#include <json.hpp>

#include "glyphsmith/error.hpp"
#include "glyphsmith/nn.hpp"
#include "glyphsmith/rng.hpp"
#include "glyphsmith/warp.hpp"

namespace glyphsmith {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using Eigen::Index;

ConstMatMap cmat(const Tensor& t, std::size_t r, std::size_t c) {
  return ConstMatMap(t.ptr(), static_cast<Index>(r), static_cast<Index>(c));
}
MatMap mat(Tensor& t, std::size_t r, std::size_t c) { return MatMap(t.ptr(), static_cast<Index>(r), static_cast<Index>(c)); }

void add_into(Tensor& acc, const Tensor& g) {
  for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += g[i];
}

// [C, h, w] <-> [h*w, C]
Tensor to_tokens(const Tensor& f) {
  const std::size_t c = f.dim(0), t = f.dim(1) * f.dim(2);
  Tensor out({t, c});
  mat(out, t, c) = cmat(f, c, t).transpose();
  return out;
}

Tensor from_tokens(const Tensor& tok, const std::vector<std::size_t>& shape) {
  Tensor out(shape);
  const std::size_t c = shape[0], t = shape[1] * shape[2];
  mat(out, c, t) = cmat(tok, t, c).transpose();
  return out;
}

struct ChannelStats {
  std::vector<double> mean, sigma;
};

ChannelStats channel_stats(const Tensor& f) {
  const std::size_t c = f.dim(0), n = f.dim(1) * f.dim(2);
  ChannelStats s{std::vector<double>(c), std::vector<double>(c)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* p = f.ptr() + ch * n;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += p[i];
    const double mu = sum / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (p[i] - mu) * (p[i] - mu);
    s.mean[ch] = mu;
    s.sigma[ch] = std::sqrt(var / static_cast<double>(n));
  }
  return s;
}

void require_map(const Tensor& t, const char* what) {
  if (t.rank() != 3) throw ShapeError(std::string(what) + ": expected [C, h, w], got " + t.shape_string());
}

}  // namespace

std::string fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::Stack:
      return "stack";
    case FusionMode::AdaIN:
      return "adain";
    case FusionMode::Attention:
      return "attention";
  }
  return "stack";
}

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "stack") return FusionMode::Stack;
  if (name == "adain") return FusionMode::AdaIN;
  if (name == "attention") return FusionMode::Attention;
  throw ConfigError("unknown fusion mode '" + name + "' (expected stack, adain or attention)");
}

void ModelConfig::validate() const {
  if (channels.empty()) throw ConfigError("model needs at least one extractor block");
  if (components != 2 && components != 3) throw ConfigError("model supports 2 or 3 components");
  if (components == 3 && fusion != FusionMode::Stack) throw ConfigError("three-component mode supports stack fusion only");
  if (groups == 0) throw ConfigError("groupnorm groups must be positive");
  for (auto c : channels) {
    if (c == 0 || c % groups != 0) throw ConfigError("extractor channels must be positive multiples of the group count");
  }
  const int factor = 1 << channels.size();
  if (input_size < factor || input_size % factor != 0) {
    throw ConfigError("input size " + std::to_string(input_size) + " must be a positive multiple of " +
                      std::to_string(factor));
  }
  if (hidden == 0) throw ConfigError("regressor width must be positive");
  if (fusion == FusionMode::Attention && attention_dim == 0) throw ConfigError("attention width must be positive");
}

std::size_t ModelConfig::feature_side() const { return static_cast<std::size_t>(input_size) >> channels.size(); }

std::size_t ModelConfig::fused_size() const {
  const std::size_t spatial = feature_side() * feature_side();
  switch (fusion) {
    case FusionMode::Stack:
      return static_cast<std::size_t>(components) * feature_channels() * spatial;
    case FusionMode::AdaIN:
      return feature_channels() * spatial;
    case FusionMode::Attention:
      return attention_dim * spatial;
  }
  return 0;
}

std::string model_config_json(const ModelConfig& c) {
  nlohmann::json j;
  j["input_size"] = c.input_size;
  j["channels"] = c.channels;
  j["groups"] = c.groups;
  j["hidden"] = c.hidden;
  j["attention_dim"] = c.attention_dim;
  j["fusion"] = fusion_mode_name(c.fusion);
  j["switcher"] = c.switcher;
  j["components"] = c.components;
  return j.dump();
}

ModelConfig parse_model_config_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.input_size = j.at("input_size").get<int>();
    c.channels = j.at("channels").get<std::vector<std::size_t>>();
    c.groups = j.at("groups").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.attention_dim = j.at("attention_dim").get<std::size_t>();
    c.fusion = parse_fusion_mode(j.at("fusion").get<std::string>());
    c.switcher = j.at("switcher").get<bool>();
    c.components = j.at("components").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Fusion

Tensor fuse_stack(const Tensor& self, const std::vector<const Tensor*>& others) {
  require_map(self, "fuse_stack");
  Buffer data = self.data;
  std::size_t channels = self.dim(0);
  for (const Tensor* o : others) {
    if (o->rank() != 3 || o->dim(1) != self.dim(1) || o->dim(2) != self.dim(2) || o->dim(0) != self.dim(0)) {
      throw ShapeError("fuse_stack: " + self.shape_string() + " vs " + o->shape_string());
    }
    data.insert(data.end(), o->data.begin(), o->data.end());
    channels += o->dim(0);
  }
  Tensor out;
  out.shape = {channels, self.dim(1), self.dim(2)};
  out.data = std::move(data);
  return out;
}

Tensor fuse_stack(const Tensor& self, const Tensor& other) { return fuse_stack(self, std::vector<const Tensor*>{&other}); }

Tensor fuse_adain(const Tensor& self, const Tensor& other) {
  require_map(self, "fuse_adain");
  if (self.shape != other.shape) throw ShapeError("fuse_adain: " + self.shape_string() + " vs " + other.shape_string());
  const std::size_t c = self.dim(0), n = self.dim(1) * self.dim(2);
  const ChannelStats s = channel_stats(self), o = channel_stats(other);
  Tensor out(self.shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double a = o.sigma[ch] / (s.sigma[ch] + kAdaINEpsilon);
    for (std::size_t i = 0; i < n; ++i) {
      out[ch * n + i] = a * (self[ch * n + i] - s.mean[ch]) + o.mean[ch];
    }
  }
  return out;
}

FusionGrads fuse_adain_backward(const Tensor& self, const Tensor& other, const Tensor& d_out) {
  if (self.shape != other.shape || self.shape != d_out.shape) throw ShapeError("fuse_adain_backward: shape mismatch");
  const std::size_t c = self.dim(0), n = self.dim(1) * self.dim(2);
  const double nn = static_cast<double>(n);
  const ChannelStats s = channel_stats(self), o = channel_stats(other);
  FusionGrads g{Tensor(self.shape), Tensor(self.shape)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* fs = self.ptr() + ch * n;
    const double* fo = other.ptr() + ch * n;
    const double* d = d_out.ptr() + ch * n;
    double sum_g = 0.0, sum_gc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_g += d[i];
      sum_gc += d[i] * (fs[i] - s.mean[ch]);
    }
    const double r = 1.0 / (s.sigma[ch] + kAdaINEpsilon);
    const double so = o.sigma[ch];
    // d sigma / d f_j = (f_j - mu) / (n sigma); taken as 0 when sigma = 0.
    const double k_self = s.sigma[ch] > 0.0 ? so * r * r * sum_gc / (nn * s.sigma[ch]) : 0.0;
    const double k_other = so > 0.0 ? sum_gc * r / (nn * so) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g.d_self[ch * n + i] = so * r * (d[i] - sum_g / nn) - k_self * (fs[i] - s.mean[ch]);
      g.d_other[ch * n + i] = k_other * (fo[i] - o.mean[ch]) + sum_g / nn;
    }
  }
  return g;
}

namespace {

struct AttentionForward {
  Tensor ts, to, q, k, v, a, out;
};

AttentionForward attention_forward(const Tensor& self, const Tensor& other, const AttentionParams& p) {
  require_map(self, "fuse_attention");
  if (self.shape != other.shape) throw ShapeError("fuse_attention: " + self.shape_string() + " vs " + other.shape_string());
  AttentionForward f;
  f.ts = to_tokens(self);
  f.to = to_tokens(other);
  f.q = nn::dense(f.ts, p.wq, p.bq);
  f.k = nn::dense(f.to, p.wk, p.bk);
  f.v = nn::dense(f.to, p.wv, p.bv);
  const std::size_t t = f.q.dim(0), d = f.q.dim(1);
  if (f.k.dim(1) != d || f.v.dim(1) != d) throw ShapeError("fuse_attention: projection widths differ");
  Tensor scores({t, t});
  mat(scores, t, t).noalias() = cmat(f.q, t, d) * cmat(f.k, t, d).transpose() / std::sqrt(static_cast<double>(d));
  f.a = nn::softmax(scores, 1);
  f.out = Tensor({t, d});
  mat(f.out, t, d).noalias() = cmat(f.a, t, t) * cmat(f.v, t, d);
  return f;
}

}  // namespace

Tensor fuse_attention(const Tensor& self, const Tensor& other, const AttentionParams& p) {
  return attention_forward(self, other, p).out;
}

AttentionGrads fuse_attention_backward(const Tensor& self, const Tensor& other, const AttentionParams& p,
                                       const Tensor& d_out) {
  const AttentionForward f = attention_forward(self, other, p);
  require_shape(d_out, f.out.shape, "fuse_attention grad");
  const std::size_t t = f.q.dim(0), d = f.q.dim(1);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor da({t, t}), dv({t, d}), dq({t, d}), dk({t, d});
  mat(da, t, t).noalias() = cmat(d_out, t, d) * cmat(f.v, t, d).transpose();
  mat(dv, t, d).noalias() = cmat(f.a, t, t).transpose() * cmat(d_out, t, d);
  Tensor ds = nn::softmax_backward(f.a, da, 1);
  for (double& x : ds.data) x *= inv_sqrt_d;
  mat(dq, t, d).noalias() = cmat(ds, t, t) * cmat(f.k, t, d);
  mat(dk, t, d).noalias() = cmat(ds, t, t).transpose() * cmat(f.q, t, d);

  const auto gq = nn::dense_backward(f.ts, p.wq, dq);
  const auto gk = nn::dense_backward(f.to, p.wk, dk);
  const auto gv = nn::dense_backward(f.to, p.wv, dv);
  Tensor d_to = gk.dx;
  add_into(d_to, gv.dx);
  AttentionGrads g;
  g.d_self = from_tokens(gq.dx, self.shape);
  g.d_other = from_tokens(d_to, other.shape);
  g.d_params = {gq.dw, gq.db, gk.dw, gk.db, gv.dw, gv.db};
  return g;
}

// ---------------------------------------------------------------------------
// Switcher

std::array<std::array<double, 6>, 6> switcher_matrix() {
  std::array<std::array<double, 6>, 6> m{};
  m[0][4] = m[4][0] = m[2][5] = m[5][2] = 1.0;
  return m;
}

std::array<double, 6> apply_switcher(const std::array<double, 6>& v) {
  const auto m = switcher_matrix();
  std::array<double, 6> out{};
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 6; ++j) {
      if (m[i][j] != 0.0) s += m[i][j] * v[j];
    }
    out[i] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

struct CarModel::Forward {
  struct Block {
    Tensor in, conv, norm, act;
  };
  std::vector<std::vector<Block>> blocks;  // [component][block]
  std::vector<Tensor> features;
  Tensor fused;                            // [K, F]
  std::vector<Tensor> pre, post;           // hidden layers, [K, hidden]
  Tensor raw;                              // [K, 6]
  std::vector<GridAffine> thetas;
};

std::size_t CarModel::add(std::string name, Tensor value) {
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

CarModel::CarModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  SplitMix64 rng(seed);
  auto uniform = [&rng](std::vector<std::size_t> shape, std::size_t fan_in) {
    Tensor t(std::move(shape));
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-a, a);
    return t;
  };

  std::size_t in_ch = 1;
  for (std::size_t i = 0; i < config_.channels.size(); ++i) {
    const std::size_t out_ch = config_.channels[i];
    const std::string p = "extractor." + std::to_string(i) + ".";
    BlockIndex b;
    b.conv_w = add(p + "conv.weight", uniform({out_ch, in_ch, 3, 3}, in_ch * 9));
    b.conv_b = add(p + "conv.bias", Tensor({out_ch}));
    b.norm_scale = add(p + "norm.scale", Tensor({out_ch}, 1.0));
    b.norm_shift = add(p + "norm.shift", Tensor({out_ch}));
    blocks_.push_back(b);
    in_ch = out_ch;
  }
  if (config_.fusion == FusionMode::Attention) {
    const std::size_t c = config_.feature_channels(), d = config_.attention_dim;
    attention_[0] = add("attention.q.weight", uniform({d, c}, c));
    attention_[1] = add("attention.q.bias", Tensor({d}));
    attention_[2] = add("attention.k.weight", uniform({d, c}, c));
    attention_[3] = add("attention.k.bias", Tensor({d}));
    attention_[4] = add("attention.v.weight", uniform({d, c}, c));
    attention_[5] = add("attention.v.bias", Tensor({d}));
  }
  std::size_t width = config_.fused_size();
  for (int layer = 0; layer < 2; ++layer) {
    const std::string p = "regressor." + std::to_string(layer) + ".";
    regressor_.push_back(add(p + "weight", uniform({config_.hidden, width}, width)));
    regressor_.push_back(add(p + "bias", uniform({config_.hidden}, width)));
    width = config_.hidden;
  }
  regressor_.push_back(add("regressor.2.weight", Tensor({6, width})));
  regressor_.push_back(add("regressor.2.bias", Tensor({6}, {1, 0, 0, 0, 1, 0})));
}

Tensor& CarModel::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw ShapeError("model has no parameter '" + name + "'");
}

const Tensor& CarModel::parameter(const std::string& name) const {
  return const_cast<CarModel*>(this)->parameter(name);
}

ParamGrads CarModel::zero_grads() const {
  ParamGrads g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.value.shape);
  return g;
}

std::size_t CarModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

AttentionParams CarModel::attention_params() const {
  return {params_[attention_[0]].value, params_[attention_[1]].value, params_[attention_[2]].value,
          params_[attention_[3]].value, params_[attention_[4]].value, params_[attention_[5]].value};
}

CarModel::Forward CarModel::run_forward(const std::vector<Raster>& images, bool keep_cache) const {
  const auto k_count = static_cast<std::size_t>(config_.components);
  if (images.size() != k_count) {
    throw ShapeError("model expects " + std::to_string(k_count) + " component images, got " +
                     std::to_string(images.size()));
  }
  const auto size = static_cast<std::size_t>(config_.input_size);
  Forward fw;
  if (keep_cache) fw.blocks.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const Raster& img = images[k];
    if (img.width != config_.input_size || img.height != config_.input_size) {
      throw ShapeError("component image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                       ", model input is " + std::to_string(size));
    }
    Tensor x({1, size, size}, img.data);
    for (const auto& b : blocks_) {
      Forward::Block cache;
      Tensor conv = nn::conv3x3(x, params_[b.conv_w].value, params_[b.conv_b].value);
      Tensor norm = nn::groupnorm(conv, config_.groups, params_[b.norm_scale].value, params_[b.norm_shift].value);
      Tensor act = nn::relu(norm);
      Tensor pooled = nn::maxpool2(act);
      if (keep_cache) fw.blocks[k].push_back({std::move(x), std::move(conv), std::move(norm), std::move(act)});
      x = std::move(pooled);
    }
    fw.features.push_back(std::move(x));
  }

  const std::size_t f = config_.fused_size();
  fw.fused = Tensor({k_count, f});
  for (std::size_t k = 0; k < k_count; ++k) {
    Tensor row;
    switch (config_.fusion) {
      case FusionMode::Stack: {
        std::vector<const Tensor*> others;
        for (std::size_t j = 0; j < k_count; ++j) {
          if (j != k) others.push_back(&fw.features[j]);
        }
        row = fuse_stack(fw.features[k], others);
        break;
      }
      case FusionMode::AdaIN:
        row = fuse_adain(fw.features[k], fw.features[1 - k]);
        break;
      case FusionMode::Attention:
        row = fuse_attention(fw.features[k], fw.features[1 - k], attention_params());
        break;
    }
    std::copy(row.data.begin(), row.data.end(), fw.fused.data.begin() + static_cast<std::ptrdiff_t>(k * f));
  }

  Tensor h = fw.fused;
  for (int layer = 0; layer < 2; ++layer) {
    Tensor pre = nn::dense(h, params_[regressor_[2 * layer]].value, params_[regressor_[2 * layer + 1]].value);
    Tensor post = nn::relu(pre);
    fw.pre.push_back(std::move(pre));
    h = post;
    fw.post.push_back(std::move(post));
  }
  fw.raw = nn::dense(h, params_[regressor_[4]].value, params_[regressor_[5]].value);
  for (std::size_t k = 0; k < k_count; ++k) {
    std::array<double, 6> v;
    for (std::size_t i = 0; i < 6; ++i) v[i] = fw.raw[k * 6 + i];
    if (config_.switcher) v = apply_switcher(v);
    fw.thetas.push_back(GridAffine{AffineMatrix{v}});
  }
  return fw;
}

void CarModel::run_backward(const Forward& fw, const std::vector<std::array<double, 6>>& d_thetas,
                            ParamGrads& grads) const {
  const auto k_count = static_cast<std::size_t>(config_.components);
  if (d_thetas.size() != k_count) throw ShapeError("one theta gradient per component expected");
  if (grads.size() != params_.size()) throw ShapeError("gradient buffer does not match the model");

  Tensor d_raw({k_count, 6});
  for (std::size_t k = 0; k < k_count; ++k) {
    // The switcher matrix is symmetric, so its transpose is itself.
    const auto d = config_.switcher ? apply_switcher(d_thetas[k]) : d_thetas[k];
    for (std::size_t i = 0; i < 6; ++i) d_raw[k * 6 + i] = d[i];
  }

  Tensor dh = d_raw;
  {
    auto g = nn::dense_backward(fw.post[1], params_[regressor_[4]].value, dh);
    add_into(grads[regressor_[4]], g.dw);
    add_into(grads[regressor_[5]], g.db);
    dh = std::move(g.dx);
  }
  for (int layer = 1; layer >= 0; --layer) {
    dh = nn::relu_backward(fw.pre[layer], dh);
    const Tensor& input = layer == 0 ? fw.fused : fw.post[0];
    auto g = nn::dense_backward(input, params_[regressor_[2 * layer]].value, dh);
    add_into(grads[regressor_[2 * layer]], g.dw);
    add_into(grads[regressor_[2 * layer + 1]], g.db);
    dh = std::move(g.dx);
  }

  const std::size_t f = config_.fused_size();
  std::vector<Tensor> d_feat;
  for (std::size_t k = 0; k < k_count; ++k) d_feat.emplace_back(fw.features[k].shape);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double* row = dh.ptr() + k * f;
    switch (config_.fusion) {
      case FusionMode::Stack: {
        const std::size_t chunk = fw.features[k].numel();
        std::size_t offset = 0;
        for (std::size_t i = 0; i < chunk; ++i) d_feat[k][i] += row[i];
        offset += chunk;
        for (std::size_t j = 0; j < k_count; ++j) {
          if (j == k) continue;
          for (std::size_t i = 0; i < chunk; ++i) d_feat[j][i] += row[offset + i];
          offset += chunk;
        }
        break;
      }
      case FusionMode::AdaIN: {
        Tensor d_out(fw.features[k].shape, std::vector<double>(row, row + f));
        auto g = fuse_adain_backward(fw.features[k], fw.features[1 - k], d_out);
        add_into(d_feat[k], g.d_self);
        add_into(d_feat[1 - k], g.d_other);
        break;
      }
      case FusionMode::Attention: {
        const std::size_t t = config_.feature_side() * config_.feature_side();
        Tensor d_out({t, config_.attention_dim}, std::vector<double>(row, row + f));
        auto g = fuse_attention_backward(fw.features[k], fw.features[1 - k], attention_params(), d_out);
        add_into(d_feat[k], g.d_self);
        add_into(d_feat[1 - k], g.d_other);
        const Tensor* dp[6] = {&g.d_params.wq, &g.d_params.bq, &g.d_params.wk,
                               &g.d_params.bk, &g.d_params.wv, &g.d_params.bv};
        for (int i = 0; i < 6; ++i) add_into(grads[attention_[i]], *dp[i]);
        break;
      }
    }
  }

  for (std::size_t k = 0; k < k_count; ++k) {
    Tensor d = std::move(d_feat[k]);
    for (std::size_t bi = blocks_.size(); bi-- > 0;) {
      const auto& b = blocks_[bi];
      const auto& c = fw.blocks[k][bi];
      d = nn::maxpool2_backward(c.act, d);
      d = nn::relu_backward(c.norm, d);
      auto gn = nn::groupnorm_backward(c.conv, config_.groups, params_[b.norm_scale].value, d);
      add_into(grads[b.norm_scale], gn.dscale);
      add_into(grads[b.norm_shift], gn.dshift);
      auto gc = nn::conv3x3_backward(c.in, params_[b.conv_w].value, gn.dx, bi > 0);
      add_into(grads[b.conv_w], gc.dk);
      add_into(grads[b.conv_b], gc.db);
      d = std::move(gc.dx);
    }
  }
}

Tensor CarModel::extract_features(const Raster& image) const {
  const auto size = static_cast<std::size_t>(config_.input_size);
  if (image.width != config_.input_size || image.height != config_.input_size) {
    throw ShapeError("extract_features: image size does not match model input " + std::to_string(size));
  }
  Tensor x({1, size, size}, image.data);
  for (const auto& b : blocks_) {
    x = nn::maxpool2(nn::relu(nn::groupnorm(nn::conv3x3(x, params_[b.conv_w].value, params_[b.conv_b].value),
                                            config_.groups, params_[b.norm_scale].value,
                                            params_[b.norm_shift].value)));
  }
  return x;
}

std::vector<GridAffine> CarModel::regress_affines(const std::vector<Raster>& images) const {
  return run_forward(images, false).thetas;
}

ComposeResult CarModel::forward_compose(const std::vector<Raster>& images) const {
  ComposeResult r;
  r.thetas = regress_affines(images);
  r.composed = Raster(config_.input_size, config_.input_size);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const Raster w = warp_forward(images[k], r.thetas[k]);
    for (std::size_t i = 0; i < w.data.size(); ++i) r.composed.data[i] += w.data[i];
  }
  return r;
}

LossBreakdown CarModel::loss_and_gradient(const std::vector<Raster>& images, const Raster& target,
                                          const LossWeights& weights, ParamGrads* grads) const {
  const Forward fw = run_forward(images, grads != nullptr);
  Raster s(config_.input_size, config_.input_size);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const Raster w = warp_forward(images[k], fw.thetas[k]);
    for (std::size_t i = 0; i < w.data.size(); ++i) s.data[i] += w.data[i];
  }
  LossBreakdown loss = loss_total(s, target, weights);
  if (grads) {
    std::vector<std::array<double, 6>> d_thetas;
    for (std::size_t k = 0; k < images.size(); ++k) {
      d_thetas.push_back(warp_backward(images[k], fw.thetas[k], loss.grad, false).d_theta);
    }
    run_backward(fw, d_thetas, *grads);
  }
  return loss;
}

void CarModel::backward_from_thetas(const std::vector<Raster>& images,
                                    const std::vector<std::array<double, 6>>& d_thetas, ParamGrads& grads) const {
  run_backward(run_forward(images, true), d_thetas, grads);
}

}  // namespace glyphsmith
