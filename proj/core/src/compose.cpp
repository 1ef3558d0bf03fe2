#include "glyphsmith/compose.hpp"

#include "glyphsmith/error.hpp"
#include "glyphsmith/unicode.hpp"
#include "glyphsmith/warp.hpp"

namespace glyphsmith {

const CarModel* ModelRegistry::find(const Layout& layout) const {
  if (auto it = models_.find(layout_tag(layout)); it != models_.end()) return it->second;
  if (auto it = models_.find(layout_kind_name(layout.kind)); it != models_.end()) return it->second;
  return nullptr;
}

ContentAffine raster_space_affine(const GridAffine& theta, int size, double units_per_em, Point shift) {
  const RenderFrame frame{size, units_per_em, 0.0, 0.0};
  const ContentAffine m = grid_to_content_affine(theta, frame);
  return ContentAffine{m.m * AffineMatrix::translate(shift.x, shift.y)};
}

namespace {

struct Operand {
  VectorGlyph glyph;
  std::vector<PlacedComponent> leaves;
};

struct StepOutput {
  Operand merged;
  Raster raster;
  std::vector<GridAffine> thetas;
};

StepOutput run_step(const CarModel& model, const std::vector<const Operand*>& operands, int units_per_em) {
  const int size = model.config().input_size;
  const RenderFrame frame{size, static_cast<double>(units_per_em), 0.0, 0.0};
  std::vector<Raster> images;
  std::vector<Point> shifts;
  for (const Operand* op : operands) {
    RenderResult r = render(op->glyph, frame, true);
    images.push_back(std::move(r.raster));
    shifts.push_back({r.frame.dx, r.frame.dy});
  }
  ComposeResult c = model.forward_compose(images);
  StepOutput out;
  out.raster = std::move(c.composed);
  out.thetas = c.thetas;
  out.merged.glyph.units_per_em = units_per_em;
  std::vector<VectorGlyph> placed;
  for (std::size_t k = 0; k < operands.size(); ++k) {
    const ContentAffine f = raster_space_affine(c.thetas[k], size, units_per_em, shifts[k]);
    placed.push_back(apply_affine(operands[k]->glyph, f));
    for (const auto& leaf : operands[k]->leaves) {
      out.merged.leaves.push_back({leaf.leaf, ContentAffine{f.m * leaf.affine.m}});
    }
  }
  out.merged.glyph = merge(placed);
  out.merged.glyph.units_per_em = units_per_em;
  return out;
}

}  // namespace

CompositionResult compose_direct(const CarModel& model, const std::vector<VectorGlyph>& components,
                                 const std::vector<char32_t>& names) {
  if (components.empty()) throw DataError("compose_direct: no components");
  const int upem = components.front().units_per_em;
  std::vector<Operand> ops;
  for (std::size_t k = 0; k < components.size(); ++k) {
    ops.push_back({components[k], {{k < names.size() ? names[k] : char32_t{0}, ContentAffine::identity()}}});
  }
  std::vector<const Operand*> ptrs;
  for (const auto& op : ops) ptrs.push_back(&op);
  StepOutput s = run_step(model, ptrs, upem);
  CompositionResult r;
  r.leaves = std::move(s.merged.leaves);
  r.glyph = std::move(s.merged.glyph);
  r.raster = std::move(s.raster);
  r.step_thetas.push_back(std::move(s.thetas));
  return r;
}

CompositionResult iterative_compose(const ModelRegistry& models, const CompositionPlan& plan, const GlyphLookup& glyphs) {
  if (plan.steps.empty()) throw DataError("composition plan has no steps");
  std::vector<Operand> results;
  std::vector<std::vector<GridAffine>> thetas;
  Raster last;
  int upem = 0;
  for (std::size_t si = 0; si < plan.steps.size(); ++si) {
    const PlanStep& step = plan.steps[si];
    const CarModel* model = models.find(step.layout);
    if (!model) throw DataError("no model for layout " + layout_tag(step.layout));
    std::vector<Operand> leaf_ops;
    leaf_ops.reserve(step.operands.size());
    for (const auto& op : step.operands) {
      if (op.is_step) {
        if (op.step >= results.size()) throw DataError("composition plan refers to a later step");
        continue;
      }
      const VectorGlyph* g = glyphs(op.leaf);
      if (!g) throw DataError("missing glyph for component " + unicode::codepoint_label(op.leaf));
      if (upem == 0) upem = g->units_per_em;
      if (g->units_per_em != upem) throw DataError("components use different em sizes");
      leaf_ops.push_back({*g, {{op.leaf, ContentAffine::identity()}}});
    }
    std::vector<const Operand*> ptrs;
    std::size_t li = 0;
    for (const auto& op : step.operands) ptrs.push_back(op.is_step ? &results[op.step] : &leaf_ops[li++]);
    if (upem == 0) upem = ptrs.front()->glyph.units_per_em;
    StepOutput out = run_step(*model, ptrs, upem);
    thetas.push_back(std::move(out.thetas));
    last = std::move(out.raster);
    results.push_back(std::move(out.merged));
  }

  CompositionResult r;
  r.leaves = results.back().leaves;
  r.raster = std::move(last);
  r.step_thetas = std::move(thetas);
  std::vector<VectorGlyph> placed;
  for (const auto& leaf : r.leaves) placed.push_back(apply_affine(*glyphs(leaf.leaf), leaf.affine));
  r.glyph = merge(placed);
  r.glyph.units_per_em = upem;
  return r;
}

}  // namespace glyphsmith
