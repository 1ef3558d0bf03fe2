#include "glyphsmith/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "glyphsmith/rng.hpp"

namespace glyphsmith {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

void GradCheckReport::append(const GradCheckReport& other, const std::string& prefix) {
  for (auto e : other.entries) {
    e.name = prefix + e.name;
    entries.push_back(std::move(e));
  }
}

std::string GradCheckReport::to_text() const {
  std::string out;
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%s %s checked=%zu excluded=%zu max_rel_err=%.3e\n", e.passed ? "PASS" : "FAIL",
                  e.name.c_str(), e.checked, e.excluded, e.max_rel_error);
    out += buf;
  }
  return out;
}

GradCheckReport grad_check(const std::function<double()>& objective, std::vector<GradCheckBlock>& blocks,
                           const GradCheckOptions& options, const KinkPredicate& near_kink) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double f0 = objective();
  const double floor = std::max(options.abs_floor, 16.0 * eps * std::max(1.0, std::abs(f0)) / (options.h * options.tol));
  SplitMix64 rng(options.sample_seed);

  auto central = [&](double& x, double h) {
    const double saved = x;
    x = saved + h;
    const double fp = objective();
    x = saved - h;
    const double fm = objective();
    x = saved;
    return (fp - fm) / (2.0 * h);
  };

  auto straddles_kink = [&](double& x) {
    const double saved = x;
    x = saved + options.h;
    const double fwd = (objective() - f0) / options.h;
    x = saved - options.h;
    const double bwd = (f0 - objective()) / options.h;
    x = saved;
    return std::abs(fwd - bwd) > options.kink_tol * std::max({std::abs(fwd), std::abs(bwd), floor});
  };

  GradCheckReport report;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& block = blocks[b];
    const std::span<double> values = block.values;
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > options.max_per_block) {
      fisher_yates(std::span<std::size_t>(idx), rng);
      idx.resize(options.max_per_block);
      std::sort(idx.begin(), idx.end());
    }

    GradCheckEntry e;
    e.name = block.name;
    for (std::size_t i : idx) {
      if (near_kink && near_kink(b, i)) {
        ++e.excluded;
        continue;
      }
      if (straddles_kink(values[i])) {
        ++e.excluded;
        continue;
      }
      const double fd = central(values[i], options.h);
      const double fd_half = central(values[i], options.h / 2.0);
      if (std::abs(fd - fd_half) > options.tol * std::max({std::abs(fd), std::abs(fd_half), floor})) {
        ++e.excluded;
        continue;
      }
      const double a = block.analytic.at(i);
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
      ++e.checked;
      if (rel > e.max_rel_error || !std::isfinite(rel)) {
        e.max_rel_error = std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity();
        e.worst_index = i;
      }
    }
    const std::size_t sampled = e.checked + e.excluded;
    const bool too_many_excluded =
        sampled > 0 && static_cast<double>(e.excluded) > options.max_excluded_fraction * static_cast<double>(sampled);
    e.passed = e.max_rel_error <= options.tol && !too_many_excluded && (e.checked > 0 || sampled == 0);
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace glyphsmith
