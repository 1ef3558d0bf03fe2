#include "glyphsmith/grad_suite.hpp"

#include <cmath>
#include <map>
#include <span>

#include "glyphsmith/losses.hpp"
#include "glyphsmith/nn.hpp"
#include "glyphsmith/rng.hpp"
#include "glyphsmith/warp.hpp"

namespace glyphsmith {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

Raster random_raster(int w, int h, SplitMix64& rng, double lo = 0.0, double hi = 1.0) {
  Raster r(w, h);
  for (double& v : r.data) v = rng.uniform(lo, hi);
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Merges entries sharing a name. Pass/fail is decided on the merged totals,
// so one kink in a six-element block of one seed does not sink the block.
struct Merged {
  GradCheckEntry entry;
  double tol = 0.0;
};

void merge_into(std::map<std::string, Merged>& acc, std::vector<std::string>& order, const GradCheckReport& r,
                const std::string& prefix, double tol) {
  for (const auto& e : r.entries) {
    const std::string name = prefix + "." + e.name;
    auto it = acc.find(name);
    if (it == acc.end()) {
      GradCheckEntry copy = e;
      copy.name = name;
      acc.emplace(name, Merged{copy, tol});
      order.push_back(name);
      continue;
    }
    auto& m = it->second.entry;
    m.checked += e.checked;
    m.excluded += e.excluded;
    if (e.max_rel_error > m.max_rel_error) {
      m.max_rel_error = e.max_rel_error;
      m.worst_index = e.worst_index;
    }
  }
}

}  // namespace

ModelConfig miniature_model_config(FusionMode fusion) {
  ModelConfig c;
  c.input_size = 16;
  c.channels = {8, 8, 16, 16};
  c.groups = 8;
  c.hidden = 12;
  c.attention_dim = 6;
  c.fusion = fusion;
  return c;
}

GradCheckReport run_gradient_suite(const GradSuiteOptions& options) {
  std::map<std::string, Merged> merged;
  std::vector<std::string> order;
  GradCheckOptions gc;
  gc.tol = options.tol;

  for (int s = 0; s < options.seeds; ++s) {
    const std::uint64_t seed = options.base_seed + static_cast<std::uint64_t>(s);
    SplitMix64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
    gc.sample_seed = seed;
    auto run = [&](const std::string& op, const std::function<double()>& f, std::vector<GradCheckBlock>& blocks,
                   const KinkPredicate& kink = {}) { merge_into(merged, order, grad_check(f, blocks, gc, kink), op, gc.tol); };

    // Warp: square on even seeds, non-square on odd ones.
    {
      const int w = s % 2 ? 7 : 6, h = s % 2 ? 5 : 6;
      Raster img = random_raster(w, h, rng);
      GridAffine theta;
      for (double& v : theta.m.v) v += rng.uniform(-0.15, 0.15);
      const Raster r = random_raster(w, h, rng, -1.0, 1.0);
      const auto g = warp_backward(img, theta, r);
      std::vector<double> theta_v(theta.m.v.begin(), theta.m.v.end());
      std::vector<GradCheckBlock> blocks{{"image", &img.data, g.d_image.data},
                                         {"theta", &theta_v, g.d_theta}};
      run("warp", [&] {
        GridAffine t;
        std::copy(theta_v.begin(), theta_v.end(), t.m.v.begin());
        return dot(warp_forward(img, t).data, r.data);
      }, blocks);
    }

    // Losses.
    {
      Raster sr = random_raster(6, 6, rng), c = random_raster(6, 6, rng);
      std::vector<GradCheckBlock> blocks{{"S", &sr.data, loss_pixel(sr, c).grad.data}};
      run("loss_pixel", [&] { return loss_pixel(sr, c).value; }, blocks,
          [&](std::size_t, std::size_t i) { return std::abs(sr.data[i] - c.data[i]) < 1e-3; });
    }
    {
      Raster sr = random_raster(6, 6, rng, 0.0, 2.5);
      std::vector<GradCheckBlock> blocks{{"S", &sr.data, loss_overlap(sr).grad.data}};
      run("loss_overlap", [&] { return loss_overlap(sr).value; }, blocks, [&](std::size_t, std::size_t i) {
        return std::abs(sr.data[i] - 1.0) < 1e-3 || std::abs(sr.data[i] - 2.0) < 1e-3;
      });
    }
    {
      Raster sr = random_raster(6, 6, rng), c = random_raster(6, 6, rng);
      std::vector<GradCheckBlock> blocks{{"S", &sr.data, loss_centroid(sr, c).grad.data}};
      run("loss_centroid", [&] { return loss_centroid(sr, c).value; }, blocks);
    }
    {
      Raster sr = random_raster(6, 6, rng), c = random_raster(6, 6, rng);
      std::vector<GradCheckBlock> blocks{{"S", &sr.data, loss_inertia(sr, c).grad.data}};
      run("loss_inertia", [&] { return loss_inertia(sr, c).value; }, blocks);
    }
    {
      Raster sr = random_raster(6, 6, rng, 0.0, 2.0), c = random_raster(6, 6, rng);
      const LossWeights w{1.0, 1.0, 0.5, 0.01};
      std::vector<GradCheckBlock> blocks{{"S", &sr.data, loss_total(sr, c, w).grad.data}};
      run("loss_total", [&] { return loss_total(sr, c, w).total; }, blocks, [&](std::size_t, std::size_t i) {
        const double v = sr.data[i];
        return std::abs(v - c.data[i]) < 1e-3 || std::abs(v - 1.0) < 1e-3 || std::abs(v - 2.0) < 1e-3;
      });
    }

    // Network primitives: objective sum(r * op(...)).
    {
      Tensor x = random_tensor({3, 5}, rng), w = random_tensor({4, 5}, rng), b = random_tensor({4}, rng);
      const Tensor r = random_tensor({3, 4}, rng);
      const auto g = nn::dense_backward(x, w, r);
      std::vector<GradCheckBlock> blocks{{"x", &x.data, g.dx.data}, {"w", &w.data, g.dw.data}, {"b", &b.data, g.db.data}};
      run("dense", [&] { return dot(nn::dense(x, w, b).data, r.data); }, blocks);
    }
    {
      Tensor x = random_tensor({2, 5, 6}, rng), k = random_tensor({3, 2, 3, 3}, rng), b = random_tensor({3}, rng);
      const Tensor r = random_tensor({3, 5, 6}, rng);
      const auto g = nn::conv3x3_backward(x, k, r);
      std::vector<GradCheckBlock> blocks{{"x", &x.data, g.dx.data}, {"k", &k.data, g.dk.data}, {"b", &b.data, g.db.data}};
      run("conv3x3", [&] { return dot(nn::conv3x3(x, k, b).data, r.data); }, blocks);
    }
    {
      Tensor x = random_tensor({4, 3, 3}, rng), scale = random_tensor({4}, rng, 0.5, 1.5),
             shift = random_tensor({4}, rng);
      const Tensor r = random_tensor({4, 3, 3}, rng);
      const auto g = nn::groupnorm_backward(x, 2, scale, r);
      std::vector<GradCheckBlock> blocks{
          {"x", &x.data, g.dx.data}, {"scale", &scale.data, g.dscale.data}, {"shift", &shift.data, g.dshift.data}};
      run("groupnorm", [&] { return dot(nn::groupnorm(x, 2, scale, shift).data, r.data); }, blocks);
    }
    {
      Tensor x = random_tensor({3, 4, 4}, rng);
      const Tensor r = random_tensor({3, 4, 4}, rng);
      std::vector<GradCheckBlock> blocks{{"x", &x.data, nn::relu_backward(x, r).data}};
      run("relu", [&] { return dot(nn::relu(x).data, r.data); }, blocks,
          [&](std::size_t, std::size_t i) { return std::abs(x.data[i]) < 1e-3; });
    }
    {
      Tensor x = random_tensor({2, 4, 6}, rng);
      const Tensor r = random_tensor({2, 2, 3}, rng);
      std::vector<GradCheckBlock> blocks{{"x", &x.data, nn::maxpool2_backward(x, r).data}};
      run("maxpool2", [&] { return dot(nn::maxpool2(x).data, r.data); }, blocks);
    }
    {
      const std::size_t axis = static_cast<std::size_t>(s % 3);
      Tensor x = random_tensor({3, 4, 5}, rng, -2.0, 2.0);
      const Tensor r = random_tensor({3, 4, 5}, rng);
      std::vector<GradCheckBlock> blocks{{"x", &x.data, nn::softmax_backward(nn::softmax(x, axis), r, axis).data}};
      run("softmax", [&] { return dot(nn::softmax(x, axis).data, r.data); }, blocks);
    }

    // Fusions.
    {
      Tensor a = random_tensor({3, 2, 3}, rng), b = random_tensor({3, 2, 3}, rng);
      const Tensor r = random_tensor({3, 2, 3}, rng);
      const auto g = fuse_adain_backward(a, b, r);
      std::vector<GradCheckBlock> blocks{{"self", &a.data, g.d_self.data}, {"other", &b.data, g.d_other.data}};
      run("fuse_adain", [&] { return dot(fuse_adain(a, b).data, r.data); }, blocks);
    }
    {
      Tensor a = random_tensor({4, 2, 2}, rng), b = random_tensor({4, 2, 2}, rng);
      AttentionParams p{random_tensor({3, 4}, rng), random_tensor({3}, rng), random_tensor({3, 4}, rng),
                        random_tensor({3}, rng),    random_tensor({3, 4}, rng), random_tensor({3}, rng)};
      const Tensor r = random_tensor({4, 3}, rng);
      const auto g = fuse_attention_backward(a, b, p, r);
      std::vector<GradCheckBlock> blocks{{"self", &a.data, g.d_self.data},     {"other", &b.data, g.d_other.data},
                                         {"wq", &p.wq.data, g.d_params.wq.data}, {"bq", &p.bq.data, g.d_params.bq.data},
                                         {"wk", &p.wk.data, g.d_params.wk.data}, {"bk", &p.bk.data, g.d_params.bk.data},
                                         {"wv", &p.wv.data, g.d_params.wv.data}, {"bv", &p.bv.data, g.d_params.bv.data}};
      run("fuse_attention", [&] { return dot(fuse_attention(a, b, p).data, r.data); }, blocks);
    }

    // Whole model on a miniature input.
    if (options.include_model) {
      const FusionMode modes[3] = {FusionMode::Stack, FusionMode::AdaIN, FusionMode::Attention};
      const FusionMode mode = modes[s % 3];
      ModelConfig mc = miniature_model_config(mode);
      mc.switcher = (s / 3) % 2 == 1;
      CarModel model(mc, seed);
      // A zero last layer would hide every upstream gradient.
      for (double& v : model.parameter("regressor.2.weight").data) v = rng.uniform(-0.05, 0.05);
      const int n = model.config().input_size;
      std::vector<Raster> images;
      for (int k = 0; k < 2; ++k) {
        Raster img(n, n);
        const int x0 = 3 + static_cast<int>(rng.below(3)), y0 = 3 + static_cast<int>(rng.below(3));
        for (int y = y0; y < y0 + 8; ++y) {
          for (int x = x0; x < x0 + 6 + k * 2; ++x) img.at(x, y) = rng.uniform(0.5, 1.0);
        }
        images.push_back(std::move(img));
      }
      const Raster target = random_raster(n, n, rng);
      const LossWeights w = LossWeights{1.0, 1.0, 5e-2, 1e-8}.rescaled_for(n);
      ParamGrads grads = model.zero_grads();
      model.loss_and_gradient(images, target, w, &grads);
      std::vector<GradCheckBlock> blocks;
      for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        auto& p = model.parameters()[i];
        blocks.push_back({p.name, &p.value.data, grads[i].data});
      }
      GradCheckOptions mo = gc;
      mo.tol = options.model_tol;
      mo.max_per_block = 12;
      const auto report =
          grad_check([&] { return model.loss_and_gradient(images, target, w, nullptr).total; }, blocks, mo);
      merge_into(merged, order, report, "model." + fusion_mode_name(mode) + (mc.switcher ? ".switcher" : ""), mo.tol);
    }
  }

  GradCheckReport out;
  for (const auto& name : order) {
    auto [e, tol] = merged.at(name);
    const double sampled = static_cast<double>(e.checked + e.excluded);
    e.passed = e.checked > 0 && e.max_rel_error <= tol &&
               static_cast<double>(e.excluded) <= gc.max_excluded_fraction * sampled;
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace glyphsmith
