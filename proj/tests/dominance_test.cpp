#include "pups/dominance.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace pups;

namespace {

std::vector<std::size_t> indices_of(const std::vector<Solution>& sols) {
  std::vector<std::size_t> out;
  for (const auto& s : sols) out.push_back(s.eval_index);
  return out;
}

}  // namespace

TEST(Dominance, Examples) {
  EXPECT_EQ(compare(ObjectiveVector{1, 2}, ObjectiveVector{2, 3}), Dominance::a_dominates_b);
  EXPECT_EQ(compare(ObjectiveVector{2, 3}, ObjectiveVector{1, 2}), Dominance::b_dominates_a);
  EXPECT_EQ(compare(ObjectiveVector{1, 2}, ObjectiveVector{1, 2}), Dominance::equal);
  EXPECT_EQ(compare(ObjectiveVector{1, 3}, ObjectiveVector{2, 2}), Dominance::incomparable);
  EXPECT_EQ(compare(ObjectiveVector{1, 2}, ObjectiveVector{1, 3}), Dominance::a_dominates_b);
}

TEST(Dominance, LengthMismatchIsContractViolation) {
  EXPECT_THROW(compare(ObjectiveVector{1, 2}, ObjectiveVector{1, 2, 3}), ContractViolation);
}

TEST(Dominance, StrictPartialOrder) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = oracle::random_points(rng, 3, 3, 4);
    const auto &a = pts[0], &b = pts[1], &c = pts[2];
    EXPECT_FALSE(dominates(a, a));
    if (dominates(a, b)) {
      EXPECT_FALSE(dominates(b, a));
    }
    if (dominates(a, b) && dominates(b, c)) {
      EXPECT_TRUE(dominates(a, c));
    }
    EXPECT_EQ(dominates(a, b), oracle::dominates(a, b));
  }
}

TEST(NondominatedFilter, Examples) {
  const std::vector<Solution> s = oracle::as_solutions({{1, 2}, {2, 3}, {0, 5}});
  EXPECT_EQ(indices_of(nondominated_filter(s)), (std::vector<std::size_t>{0, 2}));
  const std::vector<Solution> single = oracle::as_solutions({{4, 4}});
  EXPECT_EQ(nondominated_filter(single), single);
}

TEST(NondominatedFilter, EqualVectorsAllRetained) {
  const auto s = oracle::as_solutions({{1, 1}, {1, 1}, {2, 2}, {0, 3}});
  EXPECT_EQ(indices_of(nondominated_filter(s)), (std::vector<std::size_t>{0, 1, 3}));
}

TEST(NondominatedFilter, MatchesBruteForceOn200Points) {
  std::mt19937_64 rng(11);
  const auto pts = oracle::random_points(rng, 200, 3);
  std::vector<std::size_t> all(pts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  EXPECT_EQ(indices_of(nondominated_filter(oracle::as_solutions(pts))), oracle::nondominated(pts, all));
}

TEST(NondominatedFilter, IdempotentAndUnionProperty) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::as_solutions(oracle::random_points(rng, 60, 2));
    const auto once = nondominated_filter(s);
    EXPECT_EQ(nondominated_filter(once), once);

    const std::span<const Solution> all(s);
    const auto left = nondominated_filter(all.first(30));
    const auto right = nondominated_filter(all.subspan(30));
    auto both = indices_of(left);
    for (auto i : indices_of(right)) both.push_back(i);
    for (auto i : indices_of(once)) {
      EXPECT_NE(std::find(both.begin(), both.end(), i), both.end());
    }
  }
}

TEST(NondominatedFronts, ChainAndAntichain) {
  const auto chain = oracle::as_solutions({{1, 1}, {2, 2}, {3, 3}});
  const auto fronts = nondominated_fronts(chain, 3);
  ASSERT_EQ(fronts.size(), 3u);
  EXPECT_EQ(indices_of(fronts[0]), (std::vector<std::size_t>{0}));
  EXPECT_EQ(indices_of(fronts[1]), (std::vector<std::size_t>{1}));
  EXPECT_EQ(indices_of(fronts[2]), (std::vector<std::size_t>{2}));

  const auto anti = oracle::as_solutions({{0, 3}, {1, 2}, {2, 1}, {3, 0}});
  const auto one = nondominated_fronts(anti, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].size(), 4u);
}

TEST(NondominatedFronts, StopsOnceEnoughAreCovered) {
  const auto chain = oracle::as_solutions({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  EXPECT_EQ(nondominated_fronts(chain, 2).size(), 2u);
  EXPECT_EQ(nondominated_fronts(chain, 100).size(), 4u);
}

TEST(NondominatedFronts, MatchesIteratedPeelingOn100Points) {
  std::mt19937_64 rng(3);
  const auto pts = oracle::random_points(rng, 100, 2, 30);
  const auto expected = oracle::fronts(pts, pts.size());
  const auto got = nondominated_fronts(oracle::as_solutions(pts), pts.size());
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t f = 0; f < got.size(); ++f) EXPECT_EQ(indices_of(got[f]), expected[f]);
}

TEST(Dominance, ScalingPreservesRelations) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = oracle::random_points(rng, 2, 3, 5);
    auto a = pts[0], b = pts[1];
    const auto before = compare(a, b);
    for (auto& v : a) v *= 3.5;
    for (auto& v : b) v *= 3.5;
    EXPECT_EQ(compare(a, b), before);
  }
}
