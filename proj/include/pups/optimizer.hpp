#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "pups/archive.hpp"
#include "pups/dominance.hpp"
#include "pups/preference.hpp"
#include "pups/problems.hpp"
#include "pups/variation.hpp"

namespace pups {

struct OptimizerConfig {
  std::size_t minpopsize = 10;
  std::size_t burstsize = 10;
  std::size_t initial_samples = 100;
  DEParams de;
  std::uint64_t rng_seed = 1;

  void validate() const {
    // DE/rand/1 needs a parent plus three distinct donors.
    if (minpopsize < 4) throw ContractViolation("minpopsize must be at least 4");
    if (burstsize < 1) throw ContractViolation("burstsize must be at least 1");
    if (initial_samples < minpopsize) throw ContractViolation("initial_samples must be at least minpopsize");
    de.validate();
  }
};

/// Current population: the archive, backfilled with successive dominated fronts of
/// `all_points` while it holds fewer than `minpopsize` members. The last backfilled
/// front is cut to size, least-violating members first.
inline std::vector<Solution> build_population(std::span<const Solution> all_points,
                                              std::span<const Solution> archive, std::size_t minpopsize,
                                              const PreferenceRanges& ranges) {
  if (archive.size() >= minpopsize || archive.size() == all_points.size()) {
    return {archive.begin(), archive.end()};
  }
  std::vector<Solution> pop;
  const auto fronts = nondominated_front_indices(all_points, minpopsize);
  for (const auto& front : fronts) {
    if (pop.size() + front.size() <= minpopsize) {
      for (std::size_t i : front) pop.push_back(all_points[i]);
      continue;
    }
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i : front) ranked.emplace_back(violation_magnitude(all_points[i].objectives, ranges), i);
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return all_points[a.second].eval_index < all_points[b.second].eval_index;
    });
    for (std::size_t r = 0; pop.size() < minpopsize; ++r) pop.push_back(all_points[ranked[r].second]);
    break;
  }
  return pop;
}

/// Preferred population: members of `pop` inside `ranges`, topped up to `minpopsize`
/// with the least-violating remaining members (ties by eval_index).
inline std::vector<Solution> build_pref_pop(std::span<const Solution> pop, const PreferenceRanges& ranges,
                                            std::size_t minpopsize) {
  std::vector<Solution> pref;
  std::vector<std::pair<double, std::size_t>> outside;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double m = violation_magnitude(pop[i].objectives, ranges);
    if (m == 0.0) {
      pref.push_back(pop[i]);
    } else {
      outside.emplace_back(m, i);
    }
  }
  if (pref.size() >= minpopsize) return pref;
  std::sort(outside.begin(), outside.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return pop[a.second].eval_index < pop[b.second].eval_index;
  });
  for (std::size_t r = 0; r < outside.size() && pref.size() < minpopsize; ++r) {
    pref.push_back(pop[outside[r].second]);
  }
  return pref;
}

/// What one pass of the loop did; emitted to the step observer.
struct StepRecord {
  std::size_t step_index = 0;
  std::uint64_t ranges_version = 0;
  PreferenceRanges ranges;
  std::vector<EvalIndex> pref_pop;
  std::size_t evaluated = 0;
  std::size_t eval_count = 0;
};

/// Preference-guided unrestricted-population EMO (PUPS-EMO) as a steppable state machine.
///
/// initialize() runs the initial sample; each step() rebuilds the population and the
/// preferred population from the ranges in force at that moment, generates one DE child
/// per selected parent and merges the evaluated children into the history and the
/// archive. Ranges and budget changes take effect at the next step().
class Optimizer {
public:
  using StepObserver = std::function<void(const StepRecord&)>;

  Optimizer(Box bounds, std::size_t objectives, OptimizerConfig config)
      : bounds_(std::move(bounds)),
        objectives_(objectives),
        config_(config),
        ranges_(PreferenceRanges::unbounded(objectives)),
        rng_(config.rng_seed) {
    config_.validate();
    if (objectives_ < 2) throw ContractViolation("at least two objectives are required");
  }

  Optimizer(const Problem& problem, OptimizerConfig config)
      : Optimizer(problem.bounds(), problem.objectives(), config) {}

  const OptimizerConfig& config() const noexcept { return config_; }
  const Box& bounds() const noexcept { return bounds_; }
  std::size_t objectives() const noexcept { return objectives_; }
  bool initialized() const noexcept { return initialized_; }

  const std::vector<Solution>& all_points() const noexcept { return all_points_; }
  const std::vector<Solution>& archive() const noexcept { return archive_.members(); }
  const std::vector<Solution>& last_pref_pop() const noexcept { return pref_pop_; }
  const PreferenceRanges& ranges() const noexcept { return ranges_; }
  std::uint64_t ranges_version() const noexcept { return ranges_version_; }

  std::size_t eval_count() const noexcept { return all_points_.size(); }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t evals_left() const noexcept { return budget_ > eval_count() ? budget_ - eval_count() : 0; }
  std::size_t steps() const noexcept { return steps_; }
  double eval_seconds() const noexcept { return eval_seconds_; }
  double average_eval_seconds() const noexcept {
    return all_points_.empty() ? 0.0 : eval_seconds_ / static_cast<double>(all_points_.size());
  }

  void set_budget(std::size_t budget) noexcept { budget_ = budget; }
  void set_step_observer(StepObserver observer) { observer_ = std::move(observer); }

  /// Replaces the preference ranges. Returns false (and changes nothing) when they equal
  /// the ranges already in force. Invalid ranges throw ContractViolation.
  bool apply_ranges(PreferenceRanges ranges) {
    ranges.validate(objectives_);
    if (ranges == ranges_) return false;
    ranges_ = std::move(ranges);
    ++ranges_version_;
    idle_steps_ = 0;
    return true;
  }

  /// Evaluates the Latin-hypercube initial sample. The sample is always taken in full,
  /// independent of the budget. On evaluation failure nothing is kept.
  void initialize(Problem& problem) {
    if (initialized_) return;
    check_problem(problem);
    Rng saved = rng_;
    try {
      const auto points = initial_sample(bounds_, config_.initial_samples, rng_);
      commit(evaluate_batch(problem, points));
    } catch (...) {
      rng_ = saved;
      throw;
    }
    initialized_ = true;
  }

  /// Population (Steps 2 and 4) and preferred population (Steps 5 and 6) for the
  /// current state and ranges.
  std::vector<Solution> population() const {
    return build_population(all_points_, archive_.members(), config_.minpopsize, ranges_);
  }
  std::vector<Solution> preferred_population() const {
    return build_pref_pop(population(), ranges_, config_.minpopsize);
  }

  /// One pass of the loop; returns the number of evaluations performed. Generates
  /// min(burstsize, evals_left) children. Children whose decision vector was already
  /// evaluated are skipped. If an evaluation fails the state is left unchanged.
  std::size_t step(Problem& problem) {
    if (!initialized_) throw ContractViolation("step() before initialize()");
    check_problem(problem);
    const std::size_t children = std::min(config_.burstsize, evals_left());
    if (children == 0) return 0;

    Rng saved = rng_;
    StepRecord record;
    std::vector<Solution> pref;
    std::vector<Solution> evaluated;
    try {
      pref = preferred_population();
      record.step_index = steps_;
      record.ranges_version = ranges_version_;
      record.ranges = ranges_;
      for (const auto& s : pref) record.pref_pop.push_back(s.eval_index);

      const auto parents = select_parents(pref, children, rng_);
      std::vector<DecisionVector> trials;
      trials.reserve(parents.size());
      for (const auto& parent : parents) trials.push_back(de_rand_1(parent, pref, config_.de, bounds_, rng_));
      evaluated = evaluate_batch(problem, trials);
    } catch (...) {
      rng_ = saved;
      throw;
    }
    pref_pop_ = std::move(pref);
    const std::size_t n = evaluated.size();
    idle_steps_ = n == 0 ? idle_steps_ + 1 : 0;
    commit(std::move(evaluated));
    ++steps_;
    record.evaluated = n;
    record.eval_count = eval_count();
    if (observer_) observer_(record);
    return n;
  }

  /// Headless driver: initializes if needed, then steps until `target` evaluations
  /// (capped by the budget) are reached or no progress is possible.
  void run_until(Problem& problem, std::size_t target) {
    initialize(problem);
    while (eval_count() < std::min(target, budget_) && !stalled()) {
      const std::size_t saved_budget = budget_;
      budget_ = std::min(target, budget_);
      step(problem);
      budget_ = saved_budget;
    }
  }

  /// Consecutive steps after which a run that adds no new point is considered converged.
  static constexpr std::size_t kMaxIdleSteps = 1000;

  /// True once every child of the last kMaxIdleSteps steps duplicated an evaluated point:
  /// the population has collapsed to floating-point resolution and cannot spend its budget.
  bool stalled() const noexcept { return idle_steps_ >= kMaxIdleSteps; }

private:

  void check_problem(const Problem& problem) const {
    if (problem.objectives() != objectives_ || !(problem.bounds() == bounds_)) {
      throw ContractViolation("problem does not match the optimizer's objectives or bounds");
    }
  }

  std::vector<Solution> evaluate_batch(Problem& problem, const std::vector<DecisionVector>& points) {
    std::vector<Solution> out;
    std::set<DecisionVector> batch_seen;
    double seconds = 0.0;
    for (const auto& x : points) {
      if (seen_.contains(x) || !batch_seen.insert(x).second) continue;
      const auto start = std::chrono::steady_clock::now();
      auto z = problem.evaluate(x);
      seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.push_back({x, std::move(z), static_cast<EvalIndex>(all_points_.size() + out.size())});
    }
    pending_seconds_ = seconds;
    return out;
  }

  void commit(std::vector<Solution> evaluated) {
    eval_seconds_ += pending_seconds_;
    pending_seconds_ = 0.0;
    for (auto& s : evaluated) {
      seen_.insert(s.decision);
      archive_.insert(s);
      all_points_.push_back(std::move(s));
    }
  }

  Box bounds_;
  std::size_t objectives_;
  OptimizerConfig config_;
  PreferenceRanges ranges_;
  std::uint64_t ranges_version_ = 0;
  Rng rng_;
  bool initialized_ = false;
  std::size_t budget_ = std::numeric_limits<std::size_t>::max();
  std::size_t steps_ = 0;
  std::size_t idle_steps_ = 0;
  double eval_seconds_ = 0.0;
  double pending_seconds_ = 0.0;
  std::vector<Solution> all_points_;
  std::set<DecisionVector> seen_;
  Archive archive_;
  std::vector<Solution> pref_pop_;
  StepObserver observer_;
};

}  // namespace pups
