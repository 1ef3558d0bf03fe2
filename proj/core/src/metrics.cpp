#include "glyphsmith/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "glyphsmith/compose.hpp"
#include "glyphsmith/error.hpp"
#include "glyphsmith/warp.hpp"

namespace glyphsmith {

double mae(const Raster& s, const Raster& c) {
  if (!s.same_shape(c)) throw ShapeError("mae: shape mismatch");
  if (s.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) sum += std::abs(std::clamp(s.data[i], 0.0, 1.0) - c.data[i]);
  return sum / static_cast<double>(s.size());
}

double rmse(const Raster& s, const Raster& c) {
  if (!s.same_shape(c)) throw ShapeError("rmse: shape mismatch");
  if (s.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double d = std::clamp(s.data[i], 0.0, 1.0) - c.data[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(s.size()));
}

double corner_displacement_px(const ContentAffine& a, const ContentAffine& b, int size, double units_per_em) {
  const Point corners[4] = {{0, 0}, {units_per_em, 0}, {0, units_per_em}, {units_per_em, units_per_em}};
  double sum = 0.0;
  for (const Point& p : corners) sum += distance(a.m.apply(p), b.m.apply(p));
  return sum / 4.0 * size / units_per_em;
}

std::vector<GridAffine> oracle_thetas(const TrainSample& sample, double units_per_em) {
  const int size = sample.target.width;
  const RenderFrame frame{size, units_per_em, 0.0, 0.0};
  std::vector<GridAffine> out;
  for (std::size_t k = 0; k < sample.truth.size(); ++k) {
    const Point d = sample.shifts[k];
    const ContentAffine m{sample.truth[k].m * AffineMatrix::translate(-d.x, -d.y)};
    out.push_back(content_to_grid_affine(m, frame));
  }
  return out;
}

namespace {

Raster compose_with(const TrainSample& s, const std::vector<GridAffine>& thetas) {
  Raster out(s.target.width, s.target.height);
  for (std::size_t k = 0; k < s.components.size(); ++k) {
    const Raster w = warp_forward(s.components[k], thetas[k]);
    for (std::size_t i = 0; i < w.data.size(); ++i) out.data[i] += w.data[i];
  }
  return out;
}

}  // namespace

EvalReport evaluate_thetas(const std::vector<TrainSample>& samples, const std::vector<std::vector<GridAffine>>& thetas,
                           double units_per_em) {
  if (samples.empty()) throw DataError("evaluation set is empty");
  if (thetas.size() != samples.size()) throw ShapeError("one affine list per sample expected");
  EvalReport r;
  r.count = samples.size();
  r.has_truth = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TrainSample& s = samples[i];
    if (s.truth.size() != s.components.size()) r.has_truth = false;
    const Raster composed = compose_with(s, thetas[i]);
    Raster baseline(s.target.width, s.target.height);
    for (const auto& c : s.components) baseline = baseline + c;
    SampleMetrics m;
    m.mae = mae(composed, s.target);
    m.rmse = rmse(composed, s.target);
    m.baseline_mae = mae(baseline, s.target);
    m.baseline_rmse = rmse(baseline, s.target);
    if (s.truth.size() == s.components.size()) {
      const int size = s.target.width;
      double sum = 0.0;
      for (std::size_t k = 0; k < s.components.size(); ++k) {
        const ContentAffine pred = raster_space_affine(thetas[i][k], size, units_per_em, s.shifts[k]);
        sum += corner_displacement_px(pred, s.truth[k], size, units_per_em);
      }
      m.corner_px = s.components.empty() ? 0.0 : sum / static_cast<double>(s.components.size());
    }
    r.samples.push_back(m);
  }
  const double n = static_cast<double>(r.count);
  for (const auto& m : r.samples) {
    r.mae += m.mae / n;
    r.rmse += m.rmse / n;
    r.baseline_mae += m.baseline_mae / n;
    r.baseline_rmse += m.baseline_rmse / n;
    r.corner_px += m.corner_px / n;
  }
  if (!r.has_truth) r.corner_px = 0.0;
  return r;
}

EvalReport evaluate(const CarModel& model, const std::vector<TrainSample>& samples, double units_per_em) {
  if (samples.empty()) throw DataError("evaluation set is empty");
  std::vector<std::vector<GridAffine>> thetas;
  thetas.reserve(samples.size());
  for (const auto& s : samples) thetas.push_back(model.regress_affines(s.components));
  return evaluate_thetas(samples, thetas, units_per_em);
}

IterativeReport evaluate_iterative(const ModelRegistry& models, const SyntheticDataset& data, int size) {
  if (data.samples.empty()) throw DataError("evaluation set is empty");
  const std::vector<TrainSample> rendered = rasterize_dataset(data, size);
  const double upem = data.units_per_em;
  constexpr char32_t kFirstLeaf = 0xE000;
  IterativeReport out;
  std::vector<std::vector<GridAffine>> identity;
  for (const auto& s : rendered) identity.emplace_back(s.components.size(), GridAffine::identity());
  EvalReport& r = out.report = evaluate_thetas(rendered, identity, upem);
  r.mae = r.rmse = r.corner_px = 0.0;
  const double n = static_cast<double>(rendered.size());
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    const SyntheticSample& sample = data.samples[i];
    DecompEntry entry;
    entry.layout = data.layout;
    for (std::size_t k = 0; k < sample.components.size(); ++k) {
      entry.components.push_back(ComponentRef::make_leaf(kFirstLeaf + static_cast<char32_t>(k)));
    }
    const CompositionPlan plan = expand_nested(entry);
    const CompositionResult c = iterative_compose(models, plan, [&](char32_t leaf) -> const VectorGlyph* {
      const std::size_t k = leaf - kFirstLeaf;
      return k < sample.components.size() ? &sample.components[k] : nullptr;
    });
    const TrainSample& t = rendered[i];
    if (c.raster.width != size) throw ShapeError("evaluate_iterative: models run at a different size");
    SampleMetrics& m = r.samples[i];
    m.mae = mae(c.raster, t.target);
    m.rmse = rmse(c.raster, t.target);
    double corner = 0.0;
    for (const auto& leaf : c.leaves) {
      corner += corner_displacement_px(leaf.affine, t.truth[leaf.leaf - kFirstLeaf], size, upem);
    }
    m.corner_px = corner / static_cast<double>(c.leaves.size());
    const Raster outline = render(c.glyph, RenderFrame{size, upem, 0.0, 0.0}, false).raster;
    out.reraster_iou.push_back(iou(outline, clamp01(c.raster)));
    r.mae += m.mae / n;
    r.rmse += m.rmse / n;
    r.corner_px += m.corner_px / n;
    out.mean_iou += out.reraster_iou.back() / n;
  }
  return out;
}

std::string EvalReport::to_text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "count=%zu mae=%.6f rmse=%.6f baseline_mae=%.6f baseline_rmse=%.6f mae_ratio=%.4f", count, mae, rmse,
                baseline_mae, baseline_rmse, baseline_mae > 0 ? mae / baseline_mae : 0.0);
  std::string out = buf;
  if (has_truth) {
    std::snprintf(buf, sizeof buf, " corner_px=%.4f", corner_px);
    out += buf;
  }
  return out + "\n";
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["mae"] = mae;
  j["rmse"] = rmse;
  j["baseline_mae"] = baseline_mae;
  j["baseline_rmse"] = baseline_rmse;
  if (has_truth) j["corner_px"] = corner_px;
  j["samples"] = nlohmann::json::array();
  for (const auto& m : samples) {
    nlohmann::json s{{"mae", m.mae}, {"rmse", m.rmse}, {"baseline_mae", m.baseline_mae}, {"baseline_rmse", m.baseline_rmse}};
    if (has_truth) s["corner_px"] = m.corner_px;
    j["samples"].push_back(std::move(s));
  }
  return j.dump(2);
}

}  // namespace glyphsmith
