#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "pups/types.hpp"

namespace pups {

struct ViolationReport {
  std::size_t violated_count = 0;
  double total_magnitude = 0.0;
  std::vector<double> per_objective;

  bool inside() const noexcept { return violated_count == 0; }
};

/// How far `z` lies outside `ranges`, summed over objectives without normalization.
/// Infinite bounds never contribute.
inline ViolationReport violation(std::span<const double> z, const PreferenceRanges& ranges) {
  if (z.size() != ranges.lower.size() || z.size() != ranges.upper.size()) {
    throw ContractViolation("objective vector and preference ranges differ in length");
  }
  ViolationReport report;
  report.per_objective.resize(z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double excess = std::max(0.0, ranges.lower[i] - z[i]) + std::max(0.0, z[i] - ranges.upper[i]);
    report.per_objective[i] = excess;
    if (excess > 0.0) ++report.violated_count;
  }
  // Summed in a second pass so the total is exactly the sum of the stored entries.
  for (double e : report.per_objective) report.total_magnitude += e;
  return report;
}

inline double violation_magnitude(std::span<const double> z, const PreferenceRanges& ranges) {
  return violation(z, ranges).total_magnitude;
}

struct GroupedEntry {
  std::size_t index;  ///< position in the input sequence
  EvalIndex eval_index;
  double magnitude;

  friend bool operator==(const GroupedEntry&, const GroupedEntry&) = default;
};

/// groups[m] holds the solutions violating exactly m limits, best (least violating) first.
struct GroupedView {
  std::vector<std::vector<GroupedEntry>> groups;

  const std::vector<GroupedEntry>& pass_all() const { return groups.front(); }
  const std::vector<GroupedEntry>& fails(std::size_t limits) const { return groups.at(limits); }

  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

/// Partitions solutions by number of violated limits; ordered by magnitude, then eval_index.
inline GroupedView group_solutions(std::span<const Solution> solutions,
                                   const PreferenceRanges& ranges) {
  GroupedView view;
  view.groups.resize(ranges.size() + 1);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const auto report = violation(solutions[i].objectives, ranges);
    view.groups[report.violated_count].push_back(
        {i, solutions[i].eval_index, report.total_magnitude});
  }
  for (auto& group : view.groups) {
    std::sort(group.begin(), group.end(), [](const GroupedEntry& a, const GroupedEntry& b) {
      if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
      return a.eval_index < b.eval_index;
    });
  }
  return view;
}

}  // namespace pups
