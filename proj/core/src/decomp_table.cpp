#include "glyphsmith/decomp_table.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "glyphsmith/error.hpp"
#include "glyphsmith/unicode.hpp"

namespace glyphsmith {

namespace {

constexpr char32_t kTab = U'\t';

bool is_space(char32_t c) { return c == U' ' || c == U'\t' || c == U'\r' || c == U'\n' || c == 0x3000; }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

class ComponentParser {
 public:
  ComponentParser(std::vector<char32_t> text, int line, bool check_arity)
      : text_(std::move(text)), line_(line), check_arity_(check_arity) {}

  ComponentRef parse_cell() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty component cell", line_);
    ComponentRef ref = parse_node();
    skip_space();
    if (pos_ < text_.size()) {
      if (text_[pos_] == U')') throw ParseError("unbalanced parentheses: unexpected ')'", line_);
      throw ParseError("trailing characters after component", line_);
    }
    return ref;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  ComponentRef parse_node() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unbalanced parentheses: missing ')'", line_);
    const char32_t c = text_[pos_];
    if (c == U')') throw ParseError("unbalanced parentheses: unexpected ')'", line_);
    if (c != U'(') {
      ++pos_;
      if (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != U'(' && text_[pos_] != U')') {
        throw ParseError("component leaf must be a single character", line_);
      }
      return ComponentRef::make_leaf(c);
    }
    ++pos_;
    skip_space();
    std::string tag;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != U'(' && text_[pos_] != U')') {
      tag += unicode::encode(text_[pos_]);
      ++pos_;
    }
    const auto layout = parse_layout(tag);
    if (!layout) throw ParseError("unknown layout tag '" + tag + "'", line_);
    if (layout->kind == LayoutKind::NL00 || layout->kind == LayoutKind::TBD) {
      throw ParseError("layout " + tag + " cannot appear nested", line_);
    }
    std::vector<ComponentRef> kids;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) throw ParseError("unbalanced parentheses: missing ')'", line_);
      if (text_[pos_] == U')') {
        ++pos_;
        break;
      }
      kids.push_back(parse_node());
    }
    if (check_arity_ && static_cast<int>(kids.size()) != layout->arity()) {
      throw ParseError("arity mismatch in nested " + tag + ": expected " + std::to_string(layout->arity()) +
                           ", got " + std::to_string(kids.size()),
                       line_);
    }
    return ComponentRef::make_nested(*layout, std::move(kids));
  }

  std::vector<char32_t> text_;
  std::size_t pos_ = 0;
  int line_;
  bool check_arity_;
};

void collect_leaves(const ComponentRef& ref, std::vector<char32_t>& out) {
  if (ref.is_leaf()) {
    out.push_back(ref.leaf);
    return;
  }
  for (const auto& kid : ref.children) collect_leaves(kid, out);
}

}  // namespace

int Layout::arity() const {
  switch (kind) {
    case LayoutKind::NL00:
      return 0;
    case LayoutKind::NL01:
    case LayoutKind::NL02:
    case LayoutKind::NL03:
      return 2;
    case LayoutKind::NL04:
    case LayoutKind::NL05:
      return 3;
    case LayoutKind::TBD:
      return -1;
  }
  return -1;
}

std::string layout_kind_name(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::NL00: return "NL00";
    case LayoutKind::NL01: return "NL01";
    case LayoutKind::NL02: return "NL02";
    case LayoutKind::NL03: return "NL03";
    case LayoutKind::NL04: return "NL04";
    case LayoutKind::NL05: return "NL05";
    case LayoutKind::TBD: return "TBD";
  }
  return "?";
}

std::optional<Layout> parse_layout(std::string_view tag) {
  tag = trim(tag);
  if (tag == "TBD") return Layout{LayoutKind::TBD, std::nullopt};
  if (tag.size() < 4 || tag.substr(0, 3) != "NL0") return std::nullopt;
  const char k = tag[3];
  if (k < '0' || k > '5') return std::nullopt;
  Layout layout{static_cast<LayoutKind>(k - '0'), std::nullopt};
  if (tag.size() == 4) return layout;
  if (layout.kind != LayoutKind::NL03 || tag.size() != 6 || tag[4] != '-') return std::nullopt;
  if (tag[5] < '0' || tag[5] > '7') return std::nullopt;
  layout.variation = tag[5] - '0';
  return layout;
}

std::string layout_tag(const Layout& layout) {
  std::string s = layout_kind_name(layout.kind);
  if (layout.variation) s += "-" + std::to_string(*layout.variation);
  return s;
}

bool DecompEntry::is_nested() const {
  return std::any_of(components.begin(), components.end(), [](const ComponentRef& c) { return !c.is_leaf(); });
}

ComponentRef parse_component(std::string_view cell, int line) {
  return ComponentParser(unicode::decode(cell), line, true).parse_cell();
}

std::string format_component(const ComponentRef& ref) {
  if (ref.is_leaf()) return unicode::encode(ref.leaf);
  std::string s = "(" + layout_tag(ref.layout);
  for (const auto& kid : ref.children) s += " " + format_component(kid);
  return s + ")";
}

std::vector<DecompEntry> parse_table(std::string_view text, const ParseOptions& options) {
  std::vector<DecompEntry> entries;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }

    auto fields = split_tabs(line);
    if (fields.size() < 5) throw ParseError("expected at least 5 tab-separated columns", line_no);
    while (fields.size() > 8 && trim(fields.back()).empty()) fields.pop_back();
    if (fields.size() > 8) throw ParseError("too many columns", line_no);

    DecompEntry e;
    e.line = line_no;

    const auto id_text = trim(fields[0]);
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), e.id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size() || e.id <= 0) {
      throw ParseError("id must be a positive integer", line_no);
    }

    std::vector<char32_t> hanzi;
    try {
      hanzi = unicode::decode(trim(fields[1]));
    } catch (const ParseError& err) {
      throw ParseError(err.what(), line_no);
    }
    if (hanzi.size() != 1) throw ParseError("hanzi column must hold exactly one character", line_no);
    e.hanzi = hanzi[0];

    const auto cp = unicode::parse_codepoint_label(trim(fields[2]));
    if (!cp) throw ParseError("malformed codepoint '" + std::string(trim(fields[2])) + "'", line_no);
    e.codepoint = *cp;

    for (char32_t c : unicode::decode(fields[3])) {
      if (!is_space(c) && c != U',') e.radicals.push_back(c);
    }

    const auto layout = parse_layout(fields[4]);
    if (!layout) throw ParseError("unknown layout tag '" + std::string(trim(fields[4])) + "'", line_no);
    e.layout = *layout;

    bool seen_gap = false;
    for (std::size_t i = 5; i < fields.size(); ++i) {
      const auto cell = trim(fields[i]);
      if (cell.empty()) {
        seen_gap = true;
        continue;
      }
      if (seen_gap) throw ParseError("component columns must be filled left to right", line_no);
      std::vector<char32_t> scalars;
      try {
        scalars = unicode::decode(cell);
      } catch (const ParseError& err) {
        throw ParseError(err.what(), line_no);
      }
      e.components.push_back(ComponentParser(std::move(scalars), line_no, options.check_arity).parse_cell());
    }

    if (options.check_arity && e.layout.kind != LayoutKind::TBD &&
        static_cast<int>(e.components.size()) != e.layout.arity()) {
      throw ParseError("arity mismatch: " + layout_tag(e.layout) + " expects " + std::to_string(e.layout.arity()) +
                           " components, got " + std::to_string(e.components.size()),
                       line_no);
    }
    entries.push_back(std::move(e));
    if (end == text.size()) break;
  }
  return entries;
}

std::string serialize_table(const std::vector<DecompEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += std::to_string(e.id);
    out += '\t';
    out += unicode::encode(e.hanzi);
    out += '\t';
    out += unicode::codepoint_label(e.codepoint);
    out += '\t';
    out += unicode::encode(e.radicals);
    out += '\t';
    out += layout_tag(e.layout);
    for (std::size_t i = 0; i < 3; ++i) {
      out += '\t';
      if (i < e.components.size()) out += format_component(e.components[i]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_node(const DecompEntry& e, const ComponentRef& ref, std::vector<Violation>& out) {
  if (ref.is_leaf()) return;
  const auto tag = layout_tag(ref.layout);
  if (ref.layout.kind == LayoutKind::NL00 || ref.layout.kind == LayoutKind::TBD) {
    out.push_back({e.id, e.line, "nested_layout", "layout " + tag + " cannot appear nested"});
  } else if (static_cast<int>(ref.children.size()) != ref.layout.arity()) {
    out.push_back({e.id, e.line, "arity",
                   "nested " + tag + " has " + std::to_string(ref.children.size()) + " components, expected " +
                       std::to_string(ref.layout.arity())});
  }
  for (const auto& kid : ref.children) check_node(e, kid, out);
}

void check_variation(const DecompEntry& e, const Layout& l, std::vector<Violation>& out) {
  if (l.kind == LayoutKind::NL03) {
    if (l.variation && (*l.variation < 0 || *l.variation > 7)) {
      out.push_back({e.id, e.line, "variation", "NL03 variation out of range 0..7"});
    }
  } else if (l.variation) {
    out.push_back({e.id, e.line, "variation", "variation given for non-NL03 layout"});
  }
}

}  // namespace

ValidationReport validate(const std::vector<DecompEntry>& entries, const std::set<char32_t>& external) {
  ValidationReport report;
  std::unordered_map<std::int64_t, const DecompEntry*> first_by_id;
  std::set<char32_t> known;
  for (const auto& e : entries) known.insert(e.hanzi);
  std::set<char32_t> external_used;

  for (const auto& e : entries) {
    auto [it, inserted] = first_by_id.emplace(e.id, &e);
    if (!inserted) {
      report.violations.push_back({e.id, e.line, "duplicate_id",
                                   "id " + std::to_string(e.id) + " appears on line " +
                                       std::to_string(it->second->line) + " and line " + std::to_string(e.line)});
    }
    if (e.hanzi != e.codepoint) {
      report.violations.push_back({e.id, e.line, "codepoint_mismatch",
                                   unicode::codepoint_label(e.codepoint) + " does not match " +
                                       unicode::codepoint_label(e.hanzi)});
    }
    check_variation(e, e.layout, report.violations);
    if (e.layout.kind != LayoutKind::TBD && static_cast<int>(e.components.size()) != e.layout.arity()) {
      report.violations.push_back({e.id, e.line, "arity",
                                   layout_tag(e.layout) + " has " + std::to_string(e.components.size()) +
                                       " components, expected " + std::to_string(e.layout.arity())});
    }
    for (const auto& c : e.components) check_node(e, c, report.violations);

    for (char32_t leaf : distinct_leaves(e)) {
      if (known.count(leaf)) continue;
      if (external.count(leaf)) {
        external_used.insert(leaf);
        continue;
      }
      report.violations.push_back({e.id, e.line, "unknown_component",
                                   "component " + unicode::encode(leaf) + " (" + unicode::codepoint_label(leaf) +
                                       ") is neither a table row nor external"});
    }
  }
  report.external_components.assign(external_used.begin(), external_used.end());
  return report;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  if (violations.empty()) {
    os << "ok: no violations\n";
  } else {
    os << violations.size() << " violation(s)\n";
    for (const auto& v : violations) {
      os << "id=" << v.id << "\tline=" << v.line << "\t" << v.kind << "\t" << v.message << "\n";
    }
  }
  if (!external_components.empty()) {
    os << "external components: " << unicode::encode(external_components) << "\n";
  }
  return os.str();
}

std::string ValidationReport::to_json() const {
  nlohmann::json j;
  j["ok"] = ok();
  j["violations"] = nlohmann::json::array();
  for (const auto& v : violations) {
    j["violations"].push_back({{"id", v.id}, {"line", v.line}, {"kind", v.kind}, {"message", v.message}});
  }
  j["external_components"] = nlohmann::json::array();
  for (char32_t c : external_components) j["external_components"].push_back(unicode::encode(c));
  return j.dump(2);
}

std::vector<char32_t> distinct_leaves(const DecompEntry& entry) {
  std::vector<char32_t> leaves;
  for (const auto& c : entry.components) collect_leaves(c, leaves);
  std::sort(leaves.begin(), leaves.end());
  leaves.erase(std::unique(leaves.begin(), leaves.end()), leaves.end());
  return leaves;
}

LayoutStats layout_stats(const std::vector<DecompEntry>& entries) {
  LayoutStats stats;
  stats.total = entries.size();
  for (const auto& e : entries) {
    if (e.unannotated()) {
      ++stats.unannotated;
      continue;
    }
    const Layout key{e.layout.kind, std::nullopt};
    ++stats.by_layout[key];
    if (e.layout.kind == LayoutKind::NL03 && e.layout.variation) ++stats.nl03_variations[*e.layout.variation];
    if (e.is_nested()) ++stats.nested_by_layout[key];
  }
  return stats;
}

std::vector<ComponentCount> component_frequency(const std::vector<DecompEntry>& entries) {
  std::map<char32_t, std::size_t> counts;
  for (const auto& e : entries) {
    if (e.unannotated()) continue;
    for (char32_t leaf : distinct_leaves(e)) ++counts[leaf];
  }
  std::vector<ComponentCount> ranked;
  ranked.reserve(counts.size());
  for (const auto& [c, n] : counts) ranked.push_back({c, n});
  std::stable_sort(ranked.begin(), ranked.end(), [](const ComponentCount& a, const ComponentCount& b) {
    if (a.characters != b.characters) return a.characters > b.characters;
    return a.component < b.component;
  });
  return ranked;
}

std::vector<CoveragePoint> coverage_curve(const std::vector<DecompEntry>& entries, bool recursive) {
  const auto ranked = component_frequency(entries);
  std::unordered_map<char32_t, std::size_t> rank;
  for (std::size_t i = 0; i < ranked.size(); ++i) rank[ranked[i].component] = i;

  std::vector<const DecompEntry*> targets;
  for (const auto& e : entries) {
    if (e.unannotated() || e.layout.kind == LayoutKind::NL00 || e.components.empty()) continue;
    targets.push_back(&e);
  }

  std::vector<CoveragePoint> curve;
  curve.reserve(ranked.size() + 1);

  if (!recursive) {
    // A row is composable once its last-ranked leaf joins the pool. Rows with
    // nested cells need synthesized intermediates and never qualify here.
    std::vector<std::size_t> ready_at(ranked.size() + 1, 0);
    for (const auto* e : targets) {
      if (e->is_nested()) continue;
      std::size_t needed = 0;
      for (const auto& c : e->components) needed = std::max(needed, rank.at(c.leaf) + 1);
      ++ready_at[needed];
    }
    std::size_t total = 0;
    for (std::size_t n = 0; n <= ranked.size(); ++n) {
      total += ready_at[n];
      curve.push_back({n, total});
    }
    return curve;
  }

  // Worklist fixed point: each row waits on its distinct leaves; a row whose
  // leaves are all available becomes available itself as a component.
  std::unordered_map<char32_t, std::vector<std::size_t>> waiting;
  std::vector<std::size_t> missing(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto leaves = distinct_leaves(*targets[i]);
    missing[i] = leaves.size();
    for (char32_t leaf : leaves) waiting[leaf].push_back(i);
  }
  std::unordered_map<char32_t, bool> available;
  std::size_t composed = 0;
  auto make_available = [&](char32_t first) {
    std::deque<char32_t> queue{first};
    while (!queue.empty()) {
      const char32_t c = queue.front();
      queue.pop_front();
      if (available[c]) continue;
      available[c] = true;
      auto it = waiting.find(c);
      if (it == waiting.end()) continue;
      for (std::size_t idx : it->second) {
        if (--missing[idx] == 0) {
          ++composed;
          queue.push_back(targets[idx]->hanzi);
        }
      }
    }
  };
  curve.push_back({0, 0});
  for (std::size_t n = 0; n < ranked.size(); ++n) {
    make_available(ranked[n].component);
    curve.push_back({n + 1, composed});
  }
  return curve;
}

// ---------------------------------------------------------------------------

namespace {

Layout paired_layout(const Layout& l) {
  if (l.kind == LayoutKind::NL04) return Layout{LayoutKind::NL01, std::nullopt};
  if (l.kind == LayoutKind::NL05) return Layout{LayoutKind::NL02, std::nullopt};
  return l;
}

PlanOperand emit(const Layout& layout, const std::vector<ComponentRef>& kids, CompositionPlan& plan) {
  std::vector<PlanOperand> ops;
  for (const auto& kid : kids) {
    ops.push_back(kid.is_leaf() ? PlanOperand{false, kid.leaf, 0} : emit(kid.layout, kid.children, plan));
  }
  if (ops.size() == 3) {
    const Layout pair = paired_layout(layout);
    plan.steps.push_back({pair, layout, {ops[0], ops[1]}});
    const PlanOperand mid{true, 0, plan.steps.size() - 1};
    plan.steps.push_back({pair, layout, {mid, ops[2]}});
  } else {
    plan.steps.push_back({layout, layout, std::move(ops)});
  }
  return PlanOperand{true, 0, plan.steps.size() - 1};
}

}  // namespace

std::vector<char32_t> CompositionPlan::leaves() const {
  std::vector<char32_t> out;
  for (const auto& s : steps) {
    for (const auto& op : s.operands) {
      if (!op.is_step) out.push_back(op.leaf);
    }
  }
  return out;
}

CompositionPlan expand_nested(const DecompEntry& entry) {
  if (entry.layout.kind == LayoutKind::NL00 || entry.layout.kind == LayoutKind::TBD) {
    throw DataError("cannot expand " + layout_tag(entry.layout) + " entry " + unicode::encode(entry.hanzi));
  }
  if (static_cast<int>(entry.components.size()) != entry.layout.arity()) {
    throw DataError("arity mismatch in entry " + std::to_string(entry.id));
  }
  CompositionPlan plan;
  plan.target = entry.hanzi;
  emit(entry.layout, entry.components, plan);
  return plan;
}

}  // namespace glyphsmith
