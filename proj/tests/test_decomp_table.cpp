#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "generators.hpp"
#include "glyphsmith/decomp_table.hpp"
#include "glyphsmith/error.hpp"
#include "glyphsmith/unicode.hpp"

using namespace glyphsmith;

namespace {

Layout L(LayoutKind k, std::optional<int> v = std::nullopt) { return Layout{k, v}; }

DecompEntry row(std::int64_t id, char32_t hanzi, Layout layout, std::vector<ComponentRef> comps) {
  DecompEntry e;
  e.id = id;
  e.hanzi = e.codepoint = hanzi;
  e.layout = layout;
  e.components = std::move(comps);
  return e;
}

ComponentRef leaf(char32_t c) { return ComponentRef::make_leaf(c); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// --- naive oracles --------------------------------------------------------

void naive_leaves(const ComponentRef& r, std::set<char32_t>& out) {
  if (r.children.empty()) {
    out.insert(r.leaf);
    return;
  }
  for (const auto& c : r.children) naive_leaves(c, out);
}

std::set<char32_t> naive_row_leaves(const DecompEntry& e) {
  std::set<char32_t> s;
  for (const auto& c : e.components) naive_leaves(c, s);
  return s;
}

bool counts(const DecompEntry& e) { return e.layout.kind != LayoutKind::TBD; }

std::vector<ComponentCount> naive_frequency(const std::vector<DecompEntry>& rows) {
  std::map<char32_t, std::size_t> m;
  for (const auto& e : rows) {
    if (!counts(e)) continue;
    for (char32_t c : naive_row_leaves(e)) ++m[c];
  }
  std::vector<ComponentCount> out;
  for (auto [c, n] : m) out.push_back({c, n});
  std::stable_sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.characters > b.characters; });
  return out;
}

std::vector<CoveragePoint> naive_coverage(const std::vector<DecompEntry>& rows, bool recursive) {
  const auto ranked = naive_frequency(rows);
  std::vector<CoveragePoint> out;
  for (std::size_t n = 0; n <= ranked.size(); ++n) {
    std::set<char32_t> pool;
    for (std::size_t i = 0; i < n; ++i) pool.insert(ranked[i].component);
    std::vector<bool> done(rows.size(), false);
    std::size_t composed = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& e = rows[r];
        if (done[r] || !counts(e) || e.layout.kind == LayoutKind::NL00 || e.components.empty()) continue;
        if (!recursive && e.is_nested()) continue;
        const auto need = naive_row_leaves(e);
        if (!std::all_of(need.begin(), need.end(), [&](char32_t c) { return pool.count(c) > 0; })) continue;
        done[r] = true;
        ++composed;
        if (recursive) {
          pool.insert(e.hanzi);
          changed = true;
        }
      }
    }
    out.push_back({n, composed});
  }
  return out;
}

// Random tables over a small alphabet; later rows may use earlier row
// characters as components so the recursive mode has work to do.
std::vector<DecompEntry> random_table(SplitMix64& rng, std::size_t n) {
  std::vector<char32_t> pool;
  for (char32_t c = U'A'; c <= U'H'; ++c) pool.push_back(c);
  auto pick = [&] { return pool[rng.below(pool.size())]; };
  std::vector<DecompEntry> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const char32_t h = 0x4E00 + static_cast<char32_t>(i);
    const int kind = static_cast<int>(rng.below(10));
    DecompEntry e;
    if (kind == 0) {
      e = row(static_cast<std::int64_t>(i + 1), h, L(LayoutKind::NL00), {});
    } else if (kind == 1) {
      e = row(static_cast<std::int64_t>(i + 1), h, L(LayoutKind::TBD), {});
    } else if (kind <= 5) {
      const LayoutKind k = rng.below(2) ? LayoutKind::NL01 : LayoutKind::NL02;
      e = row(static_cast<std::int64_t>(i + 1), h, L(k), {leaf(pick()), leaf(pick())});
    } else if (kind == 6) {
      e = row(static_cast<std::int64_t>(i + 1), h, L(LayoutKind::NL03, static_cast<int>(rng.below(8))),
              {leaf(pick()), leaf(pick())});
    } else if (kind == 7) {
      e = row(static_cast<std::int64_t>(i + 1), h, L(LayoutKind::NL04), {leaf(pick()), leaf(pick()), leaf(pick())});
    } else {
      auto nested = ComponentRef::make_nested(L(LayoutKind::NL01), {leaf(pick()), leaf(pick())});
      e = row(static_cast<std::int64_t>(i + 1), h, L(LayoutKind::NL02), {nested, leaf(pick())});
    }
    rows.push_back(e);
    if (rng.below(2) == 0) pool.push_back(h);
  }
  return rows;
}

}  // namespace

TEST(ParseTable, LeftRightRow) {
  const auto rows = parse_table("1\t媒\tU+5A92\t女\tNL01\t女\t某\t\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].id, 1);
  EXPECT_EQ(rows[0].hanzi, U'媒');
  EXPECT_EQ(rows[0].codepoint, 0x5A92u);
  EXPECT_EQ(rows[0].radicals, std::vector<char32_t>{U'女'});
  EXPECT_EQ(rows[0].layout, L(LayoutKind::NL01));
  EXPECT_EQ(rows[0].components, (std::vector<ComponentRef>{leaf(U'女'), leaf(U'某')}));
}

TEST(ParseTable, IsolatedRowHasNoComponents) {
  const auto rows = parse_table("2\t一\tU+4E00\t\tNL00\t\t\t\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].layout, L(LayoutKind::NL00));
  EXPECT_TRUE(rows[0].components.empty());
}

TEST(ParseTable, NestedCell) {
  const auto rows = parse_table("3\tX\tU+0058\t\tNL02\t(NL01 A B)\tC\t\n");
  ASSERT_EQ(rows.size(), 1u);
  const auto& c = rows[0].components;
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], ComponentRef::make_nested(L(LayoutKind::NL01), {leaf(U'A'), leaf(U'B')}));
  EXPECT_EQ(c[1], leaf(U'C'));
  EXPECT_TRUE(rows[0].is_nested());
}

TEST(ParseTable, EnclosureVariationTag) {
  const auto rows = parse_table("4\t回\tU+56DE\t\tNL03-5\t囗\t口\t\n");
  EXPECT_EQ(rows[0].layout, L(LayoutKind::NL03, 5));
  EXPECT_EQ(layout_tag(rows[0].layout), "NL03-5");
}

TEST(ParseTable, SkipsBlankAndCommentLines) {
  const auto rows = parse_table("# header\n\n1\t一\tU+4E00\t\tNL00\t\t\t\n\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].line, 3);
}

TEST(ParseTable, ErrorsCarryLineNumbers) {
  struct Case {
    std::string text;
    std::string needle;
  };
  const Case cases[] = {
      {"1\t一\tU+4E00\t\tNL00\t\t\t\n2\t媒\tX+5A92\t\tNL01\t女\t某\t\n", "codepoint"},
      {"1\t一\tU+4E00\t\tNL00\t\t\t\n2\t媒\tU+5A92\t\tNL09\t女\t某\t\n", "layout"},
      {"1\t一\tU+4E00\t\tNL00\t\t\t\n2\t树\tU+6811\t\tNL04\t木\t又\t\n", "arity"},
      {"1\t一\tU+4E00\t\tNL00\t\t\t\n2\tX\tU+0058\t\tNL02\t(NL01 A B\tC\t\n", "parenthes"},
      {"1\t一\tU+4E00\t\tNL00\t\t\t\n2\tX\tU+0058\t\tNL02\tNL01 A B)\tC\t\n", "ingle character"},
  };
  for (const auto& c : cases) {
    try {
      parse_table(c.text);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2) << e.what();
      EXPECT_NE(std::string(e.what()).find(c.needle), std::string::npos) << e.what();
    }
  }
}

TEST(ParseTable, UnbalancedClosingParenthesis) {
  EXPECT_THROW(parse_table("1\tX\tU+0058\t\tNL02\t(NL01 A B))\tC\t\n"), ParseError);
}

TEST(ParseTable, NestedArityIsChecked) {
  EXPECT_THROW(parse_table("1\tX\tU+0058\t\tNL02\t(NL04 A B)\tC\t\n"), ParseError);
  EXPECT_THROW(parse_table("1\tX\tU+0058\t\tNL02\t(NL00 A)\tC\t\n"), ParseError);
}

TEST(ParseTable, RoundTripIsIdempotentOnSampleTable) {
  const auto once = parse_table(read_file(GLYPHSMITH_TEST_DATA "/sample_table.tsv"));
  const auto twice = parse_table(serialize_table(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(serialize_table(twice), serialize_table(once));
}

TEST(ParseTable, RoundTripProperty) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rows = random_table(rng, 1 + rng.below(40));
    const auto parsed = parse_table(serialize_table(rows));
    ASSERT_EQ(parsed, rows);
    EXPECT_EQ(parse_table(serialize_table(parsed)), parsed);
  }
}

TEST(Validate, DuplicateIdNamesBothLines) {
  const auto rows = parse_table("1\t一\tU+4E00\t\tNL00\t\t\t\n1\t二\tU+4E8C\t\tNL00\t\t\t\n");
  const auto report = validate(rows);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, "duplicate_id");
  EXPECT_NE(report.violations[0].message.find("line 1"), std::string::npos);
  EXPECT_NE(report.violations[0].message.find("line 2"), std::string::npos);
}

TEST(Validate, ThreeComponentRowWithTwoComponents) {
  ParseOptions lax;
  lax.check_arity = false;
  const auto rows = parse_table("1\t树\tU+6811\t\tNL04\t木\t又\t\n", lax);
  const auto report = validate(rows, {U'木', U'又'});
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, "arity");
}

TEST(Validate, ConsistentTableIsClean) {
  const auto rows = parse_table(
      "1\t女\tU+5973\t\tNL00\t\t\t\n"
      "2\t子\tU+5B50\t\tNL00\t\t\t\n"
      "3\t好\tU+597D\t女\tNL01\t女\t子\t\n");
  const auto report = validate(rows);
  EXPECT_TRUE(report.ok()) << report.to_text();
}

TEST(Validate, UnknownAndExternalComponents) {
  const auto rows = parse_table("1\t好\tU+597D\t\tNL01\t女\t子\t\n");
  EXPECT_EQ(validate(rows).violations.size(), 2u);
  const auto report = validate(rows, {U'女', U'子'});
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.external_components, (std::vector<char32_t>{U'女', U'子'}));
}

TEST(Validate, CodepointMismatch) {
  const auto rows = parse_table("1\t一\tU+4E01\t\tNL00\t\t\t\n");
  const auto report = validate(rows);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, "codepoint_mismatch");
}

TEST(LayoutStats, CountsByLayout) {
  const std::vector<DecompEntry> rows = {row(1, U'a', L(LayoutKind::NL01), {leaf('x'), leaf('y')}),
                                         row(2, U'b', L(LayoutKind::NL01), {leaf('x'), leaf('z')}),
                                         row(3, U'c', L(LayoutKind::NL02), {leaf('x'), leaf('y')})};
  const auto s = layout_stats(rows);
  EXPECT_EQ(s.by_layout.at(L(LayoutKind::NL01)), 2u);
  EXPECT_EQ(s.by_layout.at(L(LayoutKind::NL02)), 1u);
  EXPECT_EQ(s.total, 3u);
}

TEST(LayoutStats, EnclosureVariation) {
  const auto s = layout_stats({row(1, U'a', L(LayoutKind::NL03, 5), {leaf('x'), leaf('y')})});
  EXPECT_EQ(s.nl03_variations, (std::map<int, std::size_t>{{5, 1}}));
  EXPECT_EQ(s.by_layout.at(L(LayoutKind::NL03)), 1u);
}

TEST(LayoutStats, NestedRows) {
  const auto nested = ComponentRef::make_nested(L(LayoutKind::NL01), {leaf('A'), leaf('B')});
  const auto s = layout_stats({row(1, U'X', L(LayoutKind::NL02), {nested, leaf('C')})});
  EXPECT_EQ(s.nested_by_layout, (std::map<Layout, std::size_t>{{L(LayoutKind::NL02), 1}}));
}

TEST(LayoutStats, UnannotatedRowsAreSetAside) {
  const auto s = layout_stats({row(1, U'a', L(LayoutKind::TBD), {}), row(2, U'b', L(LayoutKind::NL00), {})});
  EXPECT_EQ(s.unannotated, 1u);
  EXPECT_EQ(s.by_layout.size(), 1u);
}

TEST(LayoutStats, CountsSumToTableSize) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rows = random_table(rng, 1 + rng.below(60));
    const auto s = layout_stats(rows);
    std::size_t sum = s.unannotated;
    for (auto [l, n] : s.by_layout) sum += n;
    EXPECT_EQ(sum, rows.size());
  }
}

TEST(ComponentFrequency, SmallCases) {
  const auto f = component_frequency({row(1, U'x', L(LayoutKind::NL01), {leaf('A'), leaf('B')}),
                                      row(2, U'y', L(LayoutKind::NL01), {leaf('A'), leaf('C')})});
  EXPECT_EQ(f, (std::vector<ComponentCount>{{'A', 2}, {'B', 1}, {'C', 1}}));
}

TEST(ComponentFrequency, NestedLeavesCountOncePerRow) {
  const auto nested = ComponentRef::make_nested(L(LayoutKind::NL01), {leaf('A'), leaf('B')});
  const auto f = component_frequency({row(1, U'X', L(LayoutKind::NL02), {nested, leaf('A')})});
  EXPECT_EQ(f, (std::vector<ComponentCount>{{'A', 1}, {'B', 1}}));
}

TEST(ComponentFrequency, MatchesNaiveRecount) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rows = random_table(rng, 1 + rng.below(1000));
    ASSERT_EQ(component_frequency(rows), naive_frequency(rows));
  }
  const auto sample = parse_table(read_file(GLYPHSMITH_TEST_DATA "/sample_table.tsv"));
  EXPECT_EQ(component_frequency(sample), naive_frequency(sample));
}

TEST(CoverageCurve, HandEnumeratedExample) {
  const auto nested = ComponentRef::make_nested(L(LayoutKind::NL01), {leaf('A'), leaf('B')});
  // The first row's character doubles as the nested intermediate.
  const std::vector<DecompEntry> rows = {row(1, U'P', L(LayoutKind::NL01), {leaf('A'), leaf('B')}),
                                         row(2, U'Q', L(LayoutKind::NL01), {leaf('A'), leaf('A')}),
                                         row(3, U'R', L(LayoutKind::NL02), {nested, leaf('A')})};
  const auto flat = coverage_curve(rows, false);
  const auto rec = coverage_curve(rows, true);
  ASSERT_EQ(flat.size(), 3u);
  EXPECT_EQ(flat[0], (CoveragePoint{0, 0}));
  EXPECT_EQ(flat[2], (CoveragePoint{2, 2}));
  EXPECT_EQ(rec[2], (CoveragePoint{2, 3}));
}

TEST(CoverageCurve, RecursiveReusesComposedCharacters) {
  // Z needs P, which is composable from A and B.
  const std::vector<DecompEntry> rows = {row(1, U'P', L(LayoutKind::NL01), {leaf('A'), leaf('B')}),
                                         row(2, U'Z', L(LayoutKind::NL02), {leaf('P'), leaf('A')})};
  const auto flat = coverage_curve(rows, false);
  // With only A and B designed, recursion reaches Z through P.
  const auto rec = coverage_curve(rows, true);
  const auto freq = component_frequency(rows);
  std::size_t n_ab = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (freq[i].component == 'B') n_ab = std::max(n_ab, i + 1);
    if (freq[i].component == 'A') n_ab = std::max(n_ab, i + 1);
  }
  EXPECT_EQ(flat[n_ab].characters, 1u);
  EXPECT_EQ(rec[n_ab].characters, 2u);
  // Designing P directly lets the flat count catch up.
  EXPECT_EQ(flat.back().characters, 2u);
}

TEST(CoverageCurve, MatchesBruteForceAndIsMonotone) {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rows = random_table(rng, 1 + rng.below(120));
    const auto flat = coverage_curve(rows, false);
    const auto rec = coverage_curve(rows, true);
    ASSERT_EQ(flat, naive_coverage(rows, false));
    ASSERT_EQ(rec, naive_coverage(rows, true));
    for (std::size_t i = 0; i < flat.size(); ++i) {
      EXPECT_LE(flat[i].characters, rec[i].characters);
      if (i > 0) {
        EXPECT_GE(flat[i].characters, flat[i - 1].characters);
        EXPECT_GE(rec[i].characters, rec[i - 1].characters);
      }
    }
  }
}

TEST(ExpandNested, SingleStep) {
  const auto plan = expand_nested(row(1, U'媒', L(LayoutKind::NL01), {leaf(U'女'), leaf(U'某')}));
  ASSERT_EQ(plan.steps.size(), 1u);
  EXPECT_EQ(plan.steps[0].layout, L(LayoutKind::NL01));
  EXPECT_EQ(plan.leaves(), (std::vector<char32_t>{U'女', U'某'}));
}

TEST(ExpandNested, LeftMiddleRightRunsLeftRightTwice) {
  const auto plan = expand_nested(row(1, U'树', L(LayoutKind::NL04), {leaf('a'), leaf('b'), leaf('c')}));
  ASSERT_EQ(plan.steps.size(), 2u);
  EXPECT_EQ(plan.steps[0].layout, L(LayoutKind::NL01));
  EXPECT_EQ(plan.steps[0].operands, (std::vector<PlanOperand>{{false, 'a', 0}, {false, 'b', 0}}));
  EXPECT_EQ(plan.steps[1].layout, L(LayoutKind::NL01));
  EXPECT_EQ(plan.steps[1].operands, (std::vector<PlanOperand>{{true, 0, 0}, {false, 'c', 0}}));
}

TEST(ExpandNested, TopMiddleBottomRunsTopBottomTwice) {
  const auto plan = expand_nested(row(1, U'意', L(LayoutKind::NL05), {leaf('a'), leaf('b'), leaf('c')}));
  ASSERT_EQ(plan.steps.size(), 2u);
  EXPECT_EQ(plan.steps[0].layout, L(LayoutKind::NL02));
  EXPECT_EQ(plan.steps[1].layout, L(LayoutKind::NL02));
}

TEST(ExpandNested, PostOrder) {
  const auto nested = ComponentRef::make_nested(L(LayoutKind::NL01), {leaf('A'), leaf('B')});
  const auto plan = expand_nested(row(1, U'X', L(LayoutKind::NL02), {nested, leaf('C')}));
  ASSERT_EQ(plan.steps.size(), 2u);
  EXPECT_EQ(plan.steps[0].layout, L(LayoutKind::NL01));
  EXPECT_EQ(plan.steps[0].operands, (std::vector<PlanOperand>{{false, 'A', 0}, {false, 'B', 0}}));
  EXPECT_EQ(plan.steps[1].layout, L(LayoutKind::NL02));
  EXPECT_EQ(plan.steps[1].operands, (std::vector<PlanOperand>{{true, 0, 0}, {false, 'C', 0}}));
}

TEST(ExpandNested, IsolatedRowIsRejected) {
  EXPECT_THROW(expand_nested(row(1, U'一', L(LayoutKind::NL00), {})), DataError);
}

namespace {

std::size_t nodes(const ComponentRef& r, std::size_t& three) {
  if (r.children.empty()) return 0;
  if (r.children.size() == 3) ++three;
  std::size_t n = 1;
  for (const auto& c : r.children) n += nodes(c, three);
  return n;
}

}  // namespace

TEST(ExpandNested, StepCountProperty) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    for (const auto& e : random_table(rng, 20)) {
      if (e.layout.kind == LayoutKind::NL00 || e.layout.kind == LayoutKind::TBD) continue;
      std::size_t three = e.layout.arity() == 3 ? 1 : 0;
      std::size_t nested = 0;
      for (const auto& c : e.components) nested += nodes(c, three);
      const auto plan = expand_nested(e);
      EXPECT_EQ(plan.steps.size(), nested + 1 + three);
      // Every step refers only to earlier steps.
      for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        for (const auto& op : plan.steps[s].operands) {
          if (op.is_step) {
            EXPECT_LT(op.step, s);
          }
        }
      }
    }
  }
}

TEST(SampleTable, FiftyRowsParseAndValidate) {
  const auto rows = parse_table(read_file(GLYPHSMITH_TEST_DATA "/sample_table.tsv"));
  EXPECT_EQ(rows.size(), 50u);
  std::set<char32_t> external;
  std::set<char32_t> present;
  for (const auto& e : rows) present.insert(e.hanzi);
  for (const auto& e : rows) {
    for (char32_t c : distinct_leaves(e)) {
      if (!present.count(c)) external.insert(c);
    }
  }
  EXPECT_TRUE(validate(rows, external).ok()) << validate(rows, external).to_text();
}
