#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pups/types.hpp"

namespace pups {

enum class Dominance { a_dominates_b, b_dominates_a, incomparable, equal };

/// Pareto comparison of two objective vectors under minimization.
inline Dominance compare(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("objective vectors differ in length");
  }
  bool a_better = false;
  bool b_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) {
      a_better = true;
    } else if (b[i] < a[i]) {
      b_better = true;
    }
    if (a_better && b_better) return Dominance::incomparable;
  }
  if (a_better) return Dominance::a_dominates_b;
  if (b_better) return Dominance::b_dominates_a;
  return Dominance::equal;
}

inline bool dominates(std::span<const double> a, std::span<const double> b) {
  return compare(a, b) == Dominance::a_dominates_b;
}

struct ObjectivesOf {
  const ObjectiveVector& operator()(const Solution& s) const noexcept { return s.objectives; }
  const ObjectiveVector& operator()(const ObjectiveVector& z) const noexcept { return z; }
};

/// Indices (ascending) of the items in `items` not dominated by any other item.
/// Items with equal objective vectors do not dominate each other and are all kept.
template <typename Item, typename Proj = ObjectivesOf>
std::vector<std::size_t> nondominated_indices(std::span<const Item> items,
                                              std::span<const std::size_t> candidates,
                                              Proj proj = {}) {
  std::vector<std::size_t> front;
  for (std::size_t i : candidates) {
    const auto& zi = proj(items[i]);
    bool dominated = false;
    std::size_t kept = 0;
    for (std::size_t m = 0; m < front.size(); ++m) {
      const auto rel = compare(proj(items[front[m]]), zi);
      if (rel == Dominance::a_dominates_b) {
        dominated = true;
        break;
      }
      if (rel != Dominance::b_dominates_a) front[kept++] = front[m];
    }
    if (dominated) continue;
    front.resize(kept);
    front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

template <typename Item, typename Proj = ObjectivesOf>
std::vector<std::size_t> nondominated_indices(std::span<const Item> items, Proj proj = {}) {
  std::vector<std::size_t> all(items.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return nondominated_indices<Item, Proj>(items, all, proj);
}

/// Peels successive non-dominated layers until at least `needed` items are covered
/// or the input is exhausted. Each layer lists indices in ascending order.
template <typename Item, typename Proj = ObjectivesOf>
std::vector<std::vector<std::size_t>> nondominated_front_indices(std::span<const Item> items,
                                                                 std::size_t needed,
                                                                 Proj proj = {}) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> remaining(items.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::size_t covered = 0;
  while (covered < needed && !remaining.empty()) {
    auto front = nondominated_indices<Item, Proj>(items, remaining, proj);
    covered += front.size();
    std::vector<std::size_t> rest;
    rest.reserve(remaining.size() - front.size());
    std::set_difference(remaining.begin(), remaining.end(), front.begin(), front.end(),
                        std::back_inserter(rest));
    remaining = std::move(rest);
    fronts.push_back(std::move(front));
  }
  return fronts;
}

inline std::vector<Solution> nondominated_filter(std::span<const Solution> solutions) {
  std::vector<Solution> out;
  for (std::size_t i : nondominated_indices(solutions)) out.push_back(solutions[i]);
  return out;
}

inline std::vector<std::vector<Solution>> nondominated_fronts(std::span<const Solution> solutions,
                                                              std::size_t needed) {
  std::vector<std::vector<Solution>> out;
  for (const auto& front : nondominated_front_indices(solutions, needed)) {
    auto& layer = out.emplace_back();
    for (std::size_t i : front) layer.push_back(solutions[i]);
  }
  return out;
}

}  // namespace pups
