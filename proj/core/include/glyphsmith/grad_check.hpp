#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace glyphsmith {

struct GradCheckOptions {
  double h = 1e-5;
  double tol = 1e-5;
  /// Smallest gradient magnitude treated as significant in the relative
  /// error denominator. The effective floor also covers the central
  /// difference roundoff level, ~eps*|f|/h.
  double abs_floor = 1e-9;
  /// One-sided differences disagreeing by more than this (relative) mark a
  /// kink straddled by the step.
  double kink_tol = 1e-2;
  /// Coordinates checked per block; larger blocks are sampled.
  std::size_t max_per_block = 64;
  /// The check fails when more than this fraction of sampled coordinates
  /// had to be excluded as non-smooth.
  double max_excluded_fraction = 0.1;
  std::uint64_t sample_seed = 1;
};

/// One named array of inputs together with the analytic gradient of the
/// objective with respect to it.
struct GradCheckBlock {
  std::string name;
  std::span<double> values;
  std::vector<double> analytic;

  template <typename Values, typename Analytic>
  GradCheckBlock(std::string n, Values* v, const Analytic& a)
      : name(std::move(n)), values(v->data(), v->size()), analytic(a.begin(), a.end()) {}
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  std::size_t excluded = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  bool passed() const;
  double max_rel_error() const;
  void append(const GradCheckReport& other, const std::string& prefix = "");
  /// One line per entry: "<PASS|FAIL> name checked=.. excluded=.. max_rel_err=..".
  std::string to_text() const;
};

/// Coordinates for which this returns true (block index, element index) are
/// skipped and counted as excluded, e.g. samples sitting on a kink.
using KinkPredicate = std::function<bool(std::size_t block, std::size_t index)>;

/// Compares analytic gradients with central differences of `objective`.
/// Each coordinate is also differenced at h/2; when the two estimates
/// disagree beyond tol the coordinate straddles a non-smooth point and is
/// excluded rather than scored.
GradCheckReport grad_check(const std::function<double()>& objective, std::vector<GradCheckBlock>& blocks,
                           const GradCheckOptions& options = {}, const KinkPredicate& near_kink = {});

}  // namespace glyphsmith
