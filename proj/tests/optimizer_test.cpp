#include "pups/optimizer.hpp"

#include <gtest/gtest.h>

#include <set>

#include <random>

#include "oracles.hpp"
#include "pups/json_io.hpp"
#include "pups/ups.hpp"

using namespace pups;

namespace {

OptimizerConfig reference_config(std::uint64_t seed) {
  OptimizerConfig c;
  c.minpopsize = 10;
  c.burstsize = 10;
  c.initial_samples = 100;
  c.de = {0.8, 0.5};
  c.rng_seed = seed;
  return c;
}

std::vector<Solution> points_at(const std::vector<ObjectiveVector>& zs) {
  std::vector<Solution> out;
  for (std::size_t i = 0; i < zs.size(); ++i) out.push_back({{static_cast<double>(i)}, zs[i], i});
  return out;
}

std::vector<EvalIndex> ids(const std::vector<Solution>& s) {
  std::vector<EvalIndex> out;
  for (const auto& x : s) out.push_back(x.eval_index);
  return out;
}

// Archive invariant by full replay: no evaluated point dominates an archive member, and
// every non-dominated point of the history is in the archive.
void expect_archive_matches_history(const Optimizer& opt) {
  const auto& all = opt.all_points();
  for (const auto& a : opt.archive()) {
    for (const auto& p : all) ASSERT_FALSE(oracle::dominates(p.objectives, a.objectives));
  }
  EXPECT_EQ(opt.archive(), nondominated_filter(all));
}

}  // namespace

TEST(OptimizerConfig, Validation) {
  EXPECT_NO_THROW(reference_config(1).validate());
  auto c = reference_config(1);
  c.minpopsize = 3;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = reference_config(1);
  c.burstsize = 0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = reference_config(1);
  c.initial_samples = 5;
  EXPECT_THROW(c.validate(), ContractViolation);
}

TEST(BuildPrefPop, AllInsideKeepsWholeArchive) {
  std::vector<ObjectiveVector> zs;
  for (int i = 0; i < 12; ++i) zs.push_back({i / 12.0, 1.0 - i / 12.0});
  const auto pop = points_at(zs);
  const auto pref = build_pref_pop(pop, PreferenceRanges::unbounded(2), 10);
  EXPECT_EQ(pref, pop);
}

TEST(BuildPrefPop, NoneInsideTakesLeastViolating) {
  std::vector<ObjectiveVector> zs;
  for (int i = 0; i < 20; ++i) zs.push_back({2.0 + i * 0.1, 3.0 - i * 0.1});
  const auto pop = points_at(zs);
  const PreferenceRanges r{{0.0, 0.0}, {1.0, 2.5}};
  const auto pref = build_pref_pop(pop, r, 10);
  ASSERT_EQ(pref.size(), 10u);
  std::vector<std::pair<double, EvalIndex>> ranked;
  for (const auto& s : pop) ranked.emplace_back(violation_magnitude(s.objectives, r), s.eval_index);
  std::sort(ranked.begin(), ranked.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(pref[i].eval_index, ranked[i].second);
}

TEST(BuildPrefPop, FiveInsideFiveLeastViolatingOthers) {
  std::vector<ObjectiveVector> zs;
  for (int i = 0; i < 10; ++i) {
    const double t = 0.05 + 0.1 * i;
    zs.push_back({t, 1.0 - std::sqrt(t)});
  }
  const auto pop = points_at(zs);
  const PreferenceRanges r{{0.4, 0.0}, {0.9, 1.0}};
  const auto pref = build_pref_pop(pop, r, 10);
  ASSERT_EQ(pref.size(), 10u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(violation(pref[i].objectives, r).violated_count, 0u);
  for (int i = 5; i < 10; ++i) EXPECT_GT(violation_magnitude(pref[i].objectives, r), 0.0);
  for (int i = 6; i < 10; ++i) {
    EXPECT_LE(violation_magnitude(pref[i - 1].objectives, r), violation_magnitude(pref[i].objectives, r));
  }
}

TEST(BuildPopulation, BackfillsWithDominatedFronts) {
  // Chain of dominated layers: one point per front.
  std::vector<ObjectiveVector> zs;
  for (int i = 0; i < 12; ++i) zs.push_back({1.0 + i, 1.0 + i});
  const auto all = points_at(zs);
  const std::vector<Solution> archive{all[0]};
  const auto pop = build_population(all, archive, 5, PreferenceRanges::unbounded(2));
  EXPECT_EQ(ids(pop), (std::vector<EvalIndex>{0, 1, 2, 3, 4}));
}

TEST(BuildPopulation, CutsLastFrontByViolation) {
  // Front 1: one point. Front 2: six incomparable points; only three fit.
  std::vector<ObjectiveVector> zs{{0.0, 0.0}};
  for (int i = 0; i < 6; ++i) zs.push_back({1.0 + i, 7.0 - i});
  const auto all = points_at(zs);
  const PreferenceRanges r{{5.0, 0.0}, {10.0, 10.0}};
  const auto pop = build_population(all, std::vector<Solution>{all[0]}, 4, r);
  // Violation only on f1 below 5: points with f1 = 6, 5, 4 violate 0, 0, 1.
  EXPECT_EQ(ids(pop), (std::vector<EvalIndex>{0, 5, 6, 4}));
}

TEST(Optimizer, InitialSampleFillsHistoryAndArchive) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(1));
  opt.initialize(problem);
  EXPECT_EQ(opt.eval_count(), 100u);
  EXPECT_FALSE(opt.archive().empty());
  expect_archive_matches_history(opt);
  std::set<EvalIndex> seen;
  for (const auto& s : opt.all_points()) EXPECT_TRUE(seen.insert(s.eval_index).second);
}

TEST(Optimizer, StepAddsBurstsizeEvaluations) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(2));
  opt.initialize(problem);
  EXPECT_EQ(opt.step(problem), 10u);
  EXPECT_EQ(opt.eval_count(), 110u);
  EXPECT_EQ(opt.steps(), 1u);
  EXPECT_GE(opt.last_pref_pop().size(), 10u);
}

TEST(Optimizer, StepHonoursBudget) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(2));
  opt.set_budget(115);
  opt.initialize(problem);
  EXPECT_EQ(opt.step(problem), 10u);
  EXPECT_EQ(opt.step(problem), 5u);
  EXPECT_EQ(opt.step(problem), 0u);
  EXPECT_EQ(opt.eval_count(), 115u);
}

TEST(Optimizer, ChildDominatingMemberEvictsIt) {
  auto spec = zdt_spec("zdt1", 2);
  // Evaluator returns objectives that improve with each call so children dominate.
  int calls = 0;
  Problem problem(spec, std::make_unique<FunctionEvaluator>([&calls](const DecisionVector& x) {
                    ++calls;
                    const double shift = calls > 20 ? 10.0 : 0.0;
                    return ObjectiveVector{x[0] - shift, 1.0 - x[0] - shift};
                  }));
  auto cfg = reference_config(4);
  cfg.initial_samples = 20;
  Optimizer opt(problem, cfg);
  opt.initialize(problem);
  const auto before = opt.archive();
  opt.step(problem);
  for (const auto& old : before) {
    EXPECT_TRUE(std::none_of(opt.archive().begin(), opt.archive().end(),
                             [&](const Solution& s) { return s.eval_index == old.eval_index; }));
  }
  expect_archive_matches_history(opt);
}

TEST(Optimizer, NoDeteriorationOnZdt1) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(5));
  opt.apply_ranges({{0.0, 0.0}, {0.5, 0.5}});
  opt.initialize(problem);
  for (int i = 0; i < 40; ++i) {
    opt.step(problem);
    expect_archive_matches_history(opt);
  }
}

TEST(Optimizer, PrefPopSizeInvariant) {
  auto problem = make_problem(zdt_spec("zdt3"));
  auto cfg = reference_config(6);
  Optimizer opt(problem, cfg);
  opt.apply_ranges({{0.3, 0.0}, {0.35, 0.1}});
  opt.initialize(problem);
  for (int i = 0; i < 30; ++i) {
    const auto pref = opt.preferred_population();
    EXPECT_GE(pref.size(), std::min(cfg.minpopsize, opt.eval_count()));
    for (const auto& s : pref) {
      const bool in_history = std::any_of(opt.all_points().begin(), opt.all_points().end(),
                                          [&](const Solution& p) { return p == s; });
      EXPECT_TRUE(in_history);
    }
    opt.step(problem);
  }
}

TEST(Optimizer, ChildrenRespectBox) {
  auto spec = zdt_spec("zdt1", 4);
  auto problem = make_problem(spec);
  auto cfg = reference_config(7);
  cfg.de.scale = 3.0;
  Optimizer opt(problem, cfg);
  opt.run_until(problem, 600);
  for (const auto& s : opt.all_points()) EXPECT_TRUE(spec.bounds.contains(s.decision));
}

TEST(Optimizer, DeterministicForSeed) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer a(problem, reference_config(8));
  Optimizer b(problem, reference_config(8));
  for (Optimizer* o : {&a, &b}) {
    o->initialize(problem);
    o->run_until(problem, 300);
    o->apply_ranges({{0.2, 0.0}, {0.4, 1.0}});
    o->run_until(problem, 600);
  }
  EXPECT_EQ(a.all_points(), b.all_points());
}

TEST(Optimizer, ApplyRangesSemantics) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(9));
  EXPECT_THROW(opt.apply_ranges({{0.5, 0.0}, {0.4, 1.0}}), ContractViolation);
  EXPECT_THROW(opt.apply_ranges({{0.0}, {1.0}}), ContractViolation);
  EXPECT_TRUE(opt.ranges().is_unbounded());
  EXPECT_TRUE(opt.apply_ranges({{0.0, 0.0}, {0.5, 0.5}}));
  EXPECT_FALSE(opt.apply_ranges({{0.0, 0.0}, {0.5, 0.5}}));
  EXPECT_EQ(opt.ranges_version(), 1u);
}

TEST(Optimizer, RangesTakeEffectAtNextStep) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(10));
  std::vector<StepRecord> log;
  opt.set_step_observer([&](const StepRecord& r) { log.push_back(r); });
  opt.initialize(problem);
  opt.step(problem);
  const PreferenceRanges box{{0.0, 0.0}, {0.5, 0.5}};
  opt.apply_ranges(box);
  opt.step(problem);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_TRUE(log[0].ranges.is_unbounded());
  EXPECT_EQ(log[1].ranges, box);
}

TEST(Optimizer, EvaluationFailureLeavesStateUnchanged) {
  auto spec = zdt_spec("zdt1", 3);
  int calls = 0;
  bool fail = false;
  Problem problem(spec, std::make_unique<FunctionEvaluator>([&](const DecisionVector& x) {
                    ++calls;
                    if (fail && calls % 3 == 0) return ObjectiveVector{std::nan(""), 0.0};
                    return eval_zdt1(x);
                  }));
  Optimizer opt(problem, reference_config(11));
  opt.initialize(problem);
  opt.step(problem);
  const auto history = opt.all_points();
  const auto archive = opt.archive();
  fail = true;
  EXPECT_THROW(opt.step(problem), EvaluationError);
  EXPECT_EQ(opt.all_points(), history);
  EXPECT_EQ(opt.archive(), archive);
  EXPECT_EQ(opt.steps(), 1u);

  // After the failure the generator is rewound: the retried step matches a clean twin.
  fail = false;
  opt.step(problem);
  auto clean = make_problem(spec);
  Optimizer twin(clean, reference_config(11));
  twin.initialize(clean);
  twin.step(clean);
  twin.step(clean);
  EXPECT_EQ(opt.all_points(), twin.all_points());
}

TEST(Optimizer, DuplicateChildrenAreNotReevaluated) {
  // Fully degenerate box: every trial point is the same vector.
  ProblemSpec spec = zdt_spec("zdt1", 2);
  spec.bounds = {{0.5, 0.0}, {0.5, 0.0}};
  int calls = 0;
  Problem problem(spec, std::make_unique<FunctionEvaluator>([&](const DecisionVector& x) {
                    ++calls;
                    return eval_zdt1(x);
                  }));
  auto cfg = reference_config(12);
  cfg.initial_samples = 10;
  Optimizer opt(problem, cfg);
  opt.initialize(problem);
  EXPECT_EQ(opt.eval_count(), 1u);
  EXPECT_EQ(calls, 1);
  opt.run_until(problem, 50);  // no progress possible; must terminate
  EXPECT_EQ(opt.eval_count(), 1u);
}

TEST(Optimizer, AverageEvaluationTimeIsTracked) {
  auto problem = make_problem(zdt_spec("zdt1"));
  Optimizer opt(problem, reference_config(13));
  EXPECT_EQ(opt.average_eval_seconds(), 0.0);
  opt.run_until(problem, 200);
  EXPECT_GT(opt.eval_seconds(), 0.0);
  EXPECT_NEAR(opt.average_eval_seconds() * 200.0, opt.eval_seconds(), 1e-12);
}

TEST(Optimizer, UnboundedRangesReproduceUpsEmo) {
  auto problem = make_problem(zdt_spec("zdt1"));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Optimizer pups(problem, reference_config(seed));
    pups.run_until(problem, 800);
    UpsOptimizer ups(problem.bounds(), 2, reference_config(seed));
    ups.run_until(problem, 800);
    EXPECT_EQ(pups.all_points(), ups.all_points());
    EXPECT_EQ(pups.archive(), ups.archive());
  }
}

TEST(Optimizer, ArchiveApproachesFrontOverTime) {
  // Mean distance to the analytic ZDT1 front, averaged over seeds, shrinks as the run goes on.
  auto problem = make_problem(zdt_spec("zdt1"));
  double early = 0.0, late = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Optimizer opt(problem, reference_config(seed));
    auto mean_distance = [&] {
      double sum = 0.0;
      for (const auto& s : opt.archive()) sum += zdt1_front_distance(s.objectives);
      return sum / static_cast<double>(opt.archive().size());
    };
    opt.run_until(problem, 500);
    early += mean_distance();
    opt.run_until(problem, 2000);
    late += mean_distance();
  }
  EXPECT_LT(late, early);
}

TEST(Optimizer, CollapsedPopulationIsReportedAsStalled) {
  // The least-violating point for this box sits on a kink of the violation surface, so the
  // preferred population collapses to adjacent doubles and every child is a duplicate.
  auto problem = make_problem(zdt_spec("zdt3"));
  OptimizerConfig config;
  config.rng_seed = 3;
  Optimizer opt(problem, config);
  opt.set_budget(2000);
  opt.initialize(problem);
  opt.apply_ranges({{0.3, 0.0}, {0.35, 0.1}});
  opt.run_until(problem, 2000);
  ASSERT_TRUE(opt.stalled());
  EXPECT_LT(opt.eval_count(), 2000u);
  std::set<DecisionVector> distinct;
  for (const auto& s : opt.all_points()) distinct.insert(s.decision);
  EXPECT_EQ(distinct.size(), opt.eval_count());

  opt.apply_ranges(PreferenceRanges::unbounded(2));
  EXPECT_FALSE(opt.stalled()) << "new ranges give the run another chance";
}
