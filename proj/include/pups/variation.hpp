#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "pups/types.hpp"

namespace pups {

using Rng = std::mt19937_64;

/// Latin-hypercube sample: each dimension is cut into `count` equal strata and every
/// stratum receives exactly one point, strata shuffled independently per dimension.
/// Degenerate dimensions (lower == upper) stay fixed.
inline std::vector<DecisionVector> initial_sample(const Box& box, std::size_t count, Rng& rng) {
  if (count == 0) throw ContractViolation("initial sample needs at least one point");
  if (box.lower.size() != box.upper.size()) throw ContractViolation("malformed box");
  const std::size_t n = box.dimension();
  std::vector<DecisionVector> points(count, DecisionVector(n));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> strata(count);
  for (std::size_t j = 0; j < n; ++j) {
    if (box.lower[j] > box.upper[j]) throw ContractViolation("box lower bound exceeds upper bound");
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    const double width = box.upper[j] - box.lower[j];
    for (std::size_t i = 0; i < count; ++i) {
      const double u = unit(rng);
      const double x = box.lower[j] +
                       width * (static_cast<double>(strata[i]) + u) / static_cast<double>(count);
      points[i][j] = std::clamp(x, box.lower[j], box.upper[j]);
    }
  }
  return points;
}

/// Picks `burstsize` parents uniformly: without replacement when the pool is large enough,
/// with replacement otherwise. Returns positions into `pool`.
inline std::vector<std::size_t> select_parents(std::size_t pool_size, std::size_t burstsize, Rng& rng) {
  if (pool_size == 0) throw ContractViolation("cannot select parents from an empty population");
  std::vector<std::size_t> picks;
  picks.reserve(burstsize);
  if (pool_size >= burstsize) {
    std::vector<std::size_t> order(pool_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < burstsize; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool_size - 1);
      std::swap(order[i], order[pick(rng)]);
      picks.push_back(order[i]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, pool_size - 1);
    for (std::size_t i = 0; i < burstsize; ++i) picks.push_back(pick(rng));
  }
  return picks;
}

inline std::vector<Solution> select_parents(std::span<const Solution> pref_pop, std::size_t burstsize,
                                            Rng& rng) {
  std::vector<Solution> parents;
  for (std::size_t i : select_parents(pref_pop.size(), burstsize, rng)) parents.push_back(pref_pop[i]);
  return parents;
}

/// r1 + F * (r2 - r3)
inline DecisionVector de_mutant(std::span<const double> r1, std::span<const double> r2,
                                std::span<const double> r3, double scale) {
  if (r1.size() != r2.size() || r1.size() != r3.size()) {
    throw ContractViolation("donor vectors differ in length");
  }
  DecisionVector v(r1.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = r1[j] + scale * (r2[j] - r3[j]);
  return v;
}

/// Binomial crossover; coordinate `forced` always comes from the mutant.
inline DecisionVector binomial_crossover(std::span<const double> parent, std::span<const double> mutant,
                                         double crossover_rate, std::size_t forced, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DecisionVector trial(parent.begin(), parent.end());
  for (std::size_t j = 0; j < trial.size(); ++j) {
    if (unit(rng) < crossover_rate || j == forced) trial[j] = mutant[j];
  }
  return trial;
}

/// Truncates each coordinate to the border of the box.
inline void clamp_to_box(DecisionVector& x, const Box& box) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], box.lower[j], box.upper[j]);
}

struct DEParams {
  double scale = 0.8;            ///< F
  double crossover_rate = 0.5;   ///< CR

  void validate() const {
    if (!(scale > 0.0)) throw ContractViolation("DE scaling factor F must be positive");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
      throw ContractViolation("DE crossover probability CR must lie in [0, 1]");
    }
  }
};

/// Picks three mutually distinct donor positions from `pool`, avoiding `parent_pos` while
/// the pool allows it. Below three candidates, draws fall back to replacement.
inline std::array<std::size_t, 3> pick_donors(std::size_t pool_size, std::size_t parent_pos, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool_size; ++i) {
    if (i != parent_pos) candidates.push_back(i);
  }
  if (candidates.size() < 3) {
    candidates.resize(pool_size);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }
  std::array<std::size_t, 3> donors{};
  if (candidates.size() >= 3) {
    for (std::size_t i = 0; i < 3; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
      donors[i] = candidates[i];
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    for (auto& d : donors) d = candidates[pick(rng)];
  }
  return donors;
}

/// DE/rand/1/bin trial point for `parent`, donors drawn from `pool`, truncated to `box`.
inline DecisionVector de_rand_1(const Solution& parent, std::span<const Solution> pool, const DEParams& de,
                                const Box& box, Rng& rng) {
  if (pool.empty()) throw ContractViolation("DE needs a non-empty donor population");
  std::size_t parent_pos = pool.size();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].eval_index == parent.eval_index) {
      parent_pos = i;
      break;
    }
  }
  const auto [a, b, c] = pick_donors(pool.size(), parent_pos, rng);
  const auto mutant = de_mutant(pool[a].decision, pool[b].decision, pool[c].decision, de.scale);
  std::uniform_int_distribution<std::size_t> coord(0, parent.decision.size() - 1);
  const std::size_t forced = coord(rng);
  auto trial = binomial_crossover(parent.decision, mutant, de.crossover_rate, forced, rng);
  clamp_to_box(trial, box);
  return trial;
}

}  // namespace pups
