#pragma once

// Reference implementation of the original, preference-free UPS-EMO loop. It recomputes
// the population from the full history every pass instead of maintaining an archive,
// and serves as the baseline arm of comparisons and as an independent check on the
// preference-guided optimizer.

#include <algorithm>
#include <set>
#include <vector>

#include "pups/dominance.hpp"
#include "pups/optimizer.hpp"
#include "pups/variation.hpp"

namespace pups {

class UpsOptimizer {
public:
  UpsOptimizer(Box bounds, std::size_t objectives, OptimizerConfig config)
      : bounds_(std::move(bounds)), objectives_(objectives), config_(config), rng_(config.rng_seed) {
    config_.validate();
  }

  const std::vector<Solution>& all_points() const noexcept { return all_points_; }
  std::size_t eval_count() const noexcept { return all_points_.size(); }

  /// Non-dominated layers of the history, taken whole until `minpopsize` is reached;
  /// the last layer is cut in evaluation order.
  std::vector<Solution> population() const {
    const auto fronts =
        nondominated_front_indices(std::span<const Solution>(all_points_), config_.minpopsize);
    std::vector<Solution> pop;
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      for (std::size_t i : fronts[f]) {
        if (f > 0 && pop.size() >= config_.minpopsize) break;
        pop.push_back(all_points_[i]);
      }
    }
    return pop;
  }

  std::vector<Solution> archive() const {
    return nondominated_filter(std::span<const Solution>(all_points_));
  }

  void run_until(Problem& problem, std::size_t target) {
    if (all_points_.empty()) evaluate(problem, initial_sample(bounds_, config_.initial_samples, rng_));
    std::size_t idle = 0;
    while (all_points_.size() < target && idle < 1000) {
      const auto pop = population();
      const std::size_t children = std::min(config_.burstsize, target - all_points_.size());
      const auto parents = select_parents(pop, children, rng_);
      std::vector<DecisionVector> trials;
      for (const auto& parent : parents) trials.push_back(de_rand_1(parent, pop, config_.de, bounds_, rng_));
      const std::size_t before = all_points_.size();
      evaluate(problem, trials);
      idle = all_points_.size() == before ? idle + 1 : 0;
    }
  }

private:
  void evaluate(Problem& problem, const std::vector<DecisionVector>& points) {
    for (const auto& x : points) {
      if (!seen_.insert(x).second) continue;
      all_points_.push_back({x, problem.evaluate(x), static_cast<EvalIndex>(all_points_.size())});
    }
  }

  Box bounds_;
  std::size_t objectives_;
  OptimizerConfig config_;
  Rng rng_;
  std::vector<Solution> all_points_;
  std::set<DecisionVector> seen_;
};

}  // namespace pups
