#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace glyphsmith {

enum class LayoutKind {
  NL00,  // isolated
  NL01,  // left-right
  NL02,  // top-bottom
  NL03,  // enclosed, 8 variations
  NL04,  // left-middle-right
  NL05,  // top-middle-bottom
  TBD,   // unannotated row
};

struct Layout {
  LayoutKind kind = LayoutKind::NL00;
  std::optional<int> variation;  // NL03 only, 0..7

  /// Number of components a row of this layout carries.
  int arity() const;
  bool operator==(const Layout&) const = default;
  auto operator<=>(const Layout&) const = default;
};

/// Parses "NL01", "NL03-2", "TBD". Returns nullopt for anything else.
std::optional<Layout> parse_layout(std::string_view tag);
std::string layout_tag(const Layout& layout);
std::string layout_kind_name(LayoutKind kind);

/// A component cell: either one character, or a nested composition
/// "(NL01 A B)" of two or three sub-components.
struct ComponentRef {
  char32_t leaf = 0;
  Layout layout;
  std::vector<ComponentRef> children;

  static ComponentRef make_leaf(char32_t c) { return ComponentRef{c, {}, {}}; }
  static ComponentRef make_nested(Layout l, std::vector<ComponentRef> kids) {
    return ComponentRef{0, l, std::move(kids)};
  }

  bool is_leaf() const { return children.empty(); }
  bool operator==(const ComponentRef&) const = default;
};

struct DecompEntry {
  std::int64_t id = 0;
  char32_t hanzi = 0;
  char32_t codepoint = 0;
  std::vector<char32_t> radicals;
  Layout layout;
  std::vector<ComponentRef> components;
  int line = 0;  // source line, 0 when built in code

  bool unannotated() const { return layout.kind == LayoutKind::TBD; }
  bool is_nested() const;
  bool operator==(const DecompEntry& o) const {
    return id == o.id && hanzi == o.hanzi && codepoint == o.codepoint && radicals == o.radicals &&
           layout == o.layout && components == o.components;
  }
};

struct ParseOptions {
  /// When false, top-level arity mismatches are left for validate() to report
  /// instead of failing the parse.
  bool check_arity = true;
};

/// Parses the tab-separated decomposition table. Blank lines and lines
/// starting with '#' are skipped. Throws ParseError carrying the line number.
std::vector<DecompEntry> parse_table(std::string_view text, const ParseOptions& options = {});

ComponentRef parse_component(std::string_view cell, int line = 0);
std::string format_component(const ComponentRef& ref);

/// Inverse of parse_table for valid entries.
std::string serialize_table(const std::vector<DecompEntry>& entries);

struct Violation {
  std::int64_t id = 0;
  int line = 0;
  std::string kind;  // duplicate_id, codepoint_mismatch, arity, nested_layout, variation, unknown_component
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<char32_t> external_components;  // referenced, absent from table, allowed

  bool ok() const { return violations.empty(); }
  std::string to_text() const;
  std::string to_json() const;
};

/// Checks every DecompEntry invariant. Leaf components that are neither rows
/// of the table nor listed in `external` are reported as unknown_component.
ValidationReport validate(const std::vector<DecompEntry>& entries,
                          const std::set<char32_t>& external = {});

struct LayoutStats {
  std::map<Layout, std::size_t> by_layout;          // NL03 rows keyed without variation
  std::map<int, std::size_t> nl03_variations;
  std::map<Layout, std::size_t> nested_by_layout;
  std::size_t unannotated = 0;
  std::size_t total = 0;
};

LayoutStats layout_stats(const std::vector<DecompEntry>& entries);

struct ComponentCount {
  char32_t component = 0;
  std::size_t characters = 0;
  bool operator==(const ComponentCount&) const = default;
};

/// Distinct leaf components per row, counted once per row, descending by
/// count with ties broken by ascending code point. TBD rows are skipped.
std::vector<ComponentCount> component_frequency(const std::vector<DecompEntry>& entries);

struct CoveragePoint {
  std::size_t components = 0;
  std::size_t characters = 0;
  bool operator==(const CoveragePoint&) const = default;
};

/// Number of composable characters when only the n most frequent components
/// are designed, for n = 0..#components. In recursive mode a character that
/// becomes composable joins the pool and may serve as a component of others.
std::vector<CoveragePoint> coverage_curve(const std::vector<DecompEntry>& entries, bool recursive);

/// Operand of a composition step: a designed leaf glyph or the output of an
/// earlier step.
struct PlanOperand {
  bool is_step = false;
  char32_t leaf = 0;
  std::size_t step = 0;
  bool operator==(const PlanOperand&) const = default;
};

struct PlanStep {
  Layout layout;         // layout of the pairwise model to run
  Layout source_layout;  // layout of the ComponentRef node that produced it
  std::vector<PlanOperand> operands;
};

struct CompositionPlan {
  char32_t target = 0;
  std::vector<PlanStep> steps;

  /// Leaf characters in the order a post-order walk meets them.
  std::vector<char32_t> leaves() const;
};

/// Post-order expansion of the component tree. Three-component layouts are
/// split into two pairwise steps (NL04 runs NL01 twice, NL05 runs NL02 twice).
CompositionPlan expand_nested(const DecompEntry& entry);

/// Distinct leaf characters of a row, ascending.
std::vector<char32_t> distinct_leaves(const DecompEntry& entry);

}  // namespace glyphsmith
