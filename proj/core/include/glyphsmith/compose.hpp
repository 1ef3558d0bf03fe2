#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "glyphsmith/car_model.hpp"
#include "glyphsmith/decomp_table.hpp"
#include "glyphsmith/glyph.hpp"
#include "glyphsmith/raster.hpp"

namespace glyphsmith {

/// Maps plan-step layouts to trained pairwise models. Lookup tries the full
/// tag ("NL03-2") before the layout kind ("NL03").
class ModelRegistry {
 public:
  void add(const std::string& key, const CarModel* model) { models_[key] = model; }
  /// nullptr when no model serves `layout`.
  const CarModel* find(const Layout& layout) const;
  bool empty() const { return models_.empty(); }

 private:
  std::map<std::string, const CarModel*> models_;
};

/// Font-unit transform of the frame-0 raster space (em box at the origin,
/// no offset) equivalent to warping a raster rendered with shift `d` by theta:
/// grid_to_content_affine(theta, frame with no offset) * translate(d).
ContentAffine raster_space_affine(const GridAffine& theta, int size, double units_per_em, Point shift);

struct PlacedComponent {
  char32_t leaf = 0;
  ContentAffine affine;  // original glyph coordinates -> composed glyph coordinates
};

struct CompositionResult {
  std::vector<PlacedComponent> leaves;       // in plan leaf order
  VectorGlyph glyph;                         // merge of leaf glyphs under their affines
  Raster raster;                             // the last model call's summed raster
  std::vector<std::vector<GridAffine>> step_thetas;
};

/// One model call on component glyphs rendered centered at the model's
/// input size.
CompositionResult compose_direct(const CarModel& model, const std::vector<VectorGlyph>& components,
                                 const std::vector<char32_t>& names = {});

using GlyphLookup = std::function<const VectorGlyph*(char32_t)>;

/// Runs the plan step by step. Each step renders its operands centered,
/// regresses their affines and carries the resulting transforms down to
/// the leaves; intermediate results re-enter later steps as vector glyphs.
/// Throws DataError for a missing model or leaf glyph.
CompositionResult iterative_compose(const ModelRegistry& models, const CompositionPlan& plan, const GlyphLookup& glyphs);

}  // namespace glyphsmith
