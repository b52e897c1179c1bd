#include "pups/external_evaluator.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pups/json_io.hpp"
#include "pups/optimizer.hpp"

using namespace pups;

namespace {

const std::string kFake = PUPS_FAKE_EVALUATOR;

DecisionVector random_point(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DecisionVector x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace

TEST(SubprocessEvaluator, EchoRoundTrip) {
  SubprocessEvaluator ev({kFake, "echo", "2"}, 2);
  const DecisionVector x{0.1234567890123456789, 1e-300, 0.5};
  const auto z = ev.evaluate(x);
  EXPECT_EQ(z, (ObjectiveVector{x[0], x[1]}));
  EXPECT_EQ(ev.launches(), 1);
  ev.evaluate(x);
  EXPECT_EQ(ev.launches(), 1) << "process is reused between evaluations";
}

TEST(SubprocessEvaluator, MatchesBuiltinZdt1) {
  SubprocessEvaluator ev({kFake, "zdt1"}, 2);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_point(rng, 30);
    const auto ext = ev.evaluate(x);
    const auto builtin = eval_zdt1(x);
    EXPECT_NEAR(ext[0], builtin[0], 1e-12);
    EXPECT_NEAR(ext[1], builtin[1], 1e-12);
  }
}

TEST(SubprocessEvaluator, ProtocolFailuresRaiseEvaluationError) {
  const DecisionVector x{0.5, 0.5};
  for (const char* mode : {"nan", "nan-array", "garbage", "arity", "text", "exit"}) {
    SubprocessEvaluator ev({kFake, mode}, 2);
    EXPECT_THROW(ev.evaluate(x), EvaluationError) << mode;
    EXPECT_FALSE(ev.running()) << mode;
  }
}

TEST(SubprocessEvaluator, Timeout) {
  SubprocessEvaluator ev({kFake, "silent"}, 2, 0.2);
  EXPECT_THROW(ev.evaluate({0.5, 0.5}), EvaluationError);
}

TEST(SubprocessEvaluator, MissingExecutable) {
  SubprocessEvaluator ev({"/nonexistent/evaluator"}, 2);
  EXPECT_THROW(ev.evaluate({0.5, 0.5}), EvaluationError);
}

TEST(SubprocessEvaluator, RestartsAfterFailure) {
  SubprocessEvaluator ev({kFake, "bad-after", "1"}, 2);
  EXPECT_NO_THROW(ev.evaluate({0.5, 0.5}));
  EXPECT_THROW(ev.evaluate({0.5, 0.5}), EvaluationError);
  EXPECT_NO_THROW(ev.evaluate({0.5, 0.5}));
  EXPECT_EQ(ev.launches(), 2);
}

TEST(SubprocessEvaluator, ProblemFromConfigDrivesOptimizer) {
  Json doc = {{"name", "ext-zdt1"}, {"k", 2}, {"n", 5}, {"evaluator", {{"command", {kFake, "zdt1"}}}}};
  doc["bounds"] = Json::array();
  for (int i = 0; i < 5; ++i) doc["bounds"].push_back({0.0, 1.0});
  auto external = make_problem(problem_spec_from_json(doc));
  auto builtin = make_problem(zdt_spec("zdt1", 5));
  OptimizerConfig cfg;
  cfg.initial_samples = 20;
  cfg.rng_seed = 3;
  Optimizer a(external, cfg), b(builtin, cfg);
  a.run_until(external, 120);
  b.run_until(builtin, 120);
  ASSERT_EQ(a.all_points().size(), b.all_points().size());
  for (std::size_t i = 0; i < a.all_points().size(); ++i) {
    EXPECT_EQ(a.all_points()[i].decision, b.all_points()[i].decision);
    EXPECT_NEAR(a.all_points()[i].objectives[1], b.all_points()[i].objectives[1], 1e-12);
  }
}

TEST(SubprocessEvaluator, NanReplyDoesNotAdvanceEvalCount) {
  ProblemSpec spec = zdt_spec("zdt1", 3);
  spec.evaluator = ExternalEvaluator{{kFake, "bad-after", "25"}, 5.0};
  auto problem = make_problem(spec);
  OptimizerConfig cfg;
  cfg.initial_samples = 20;
  Optimizer opt(problem, cfg);
  opt.initialize(problem);
  EXPECT_EQ(opt.eval_count(), 20u);
  EXPECT_THROW(opt.step(problem), EvaluationError);
  EXPECT_EQ(opt.eval_count(), 20u);
}
