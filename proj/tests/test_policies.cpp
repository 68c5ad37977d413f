#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "mnlrank/harness.hpp"
#include "mnlrank/policies.hpp"
#include "test_support.hpp"

using namespace mnlrank;

namespace {

PolicyContext context_for(const ProblemInstance& inst, std::int64_t horizon, bool known) {
  return PolicyContext{inst.n_items(), inst.n_slots(), horizon,
                       known ? inst.lambda : std::vector<double>{}};
}

// Drives an epoch policy for `rounds` rounds and counts rounds per action.
std::map<std::vector<int>, std::int64_t> drive_epochs(EpochPolicy& policy,
                                                      const ProblemInstance& inst,
                                                      std::int64_t rounds, SimulationRng& rng) {
  std::map<std::vector<int>, std::int64_t> played;
  std::int64_t t = 0, l = 0;
  while (t < rounds) {
    const Action a = policy.begin_epoch(++l);
    EXPECT_TRUE(is_valid_action(inst.n_items(), inst.n_slots(), a));
    const auto rec = run_epoch(inst, a, rounds - t, rng);
    played[a.slots] += rec.length;
    policy.observe(rec);
    t += rec.length;
  }
  return played;
}

std::map<std::vector<int>, std::int64_t> drive_rounds(RoundPolicy& policy,
                                                      const ProblemInstance& inst,
                                                      std::int64_t rounds, SimulationRng& rng) {
  std::map<std::vector<int>, std::int64_t> played;
  for (std::int64_t t = 1; t <= rounds; ++t) {
    const Action a = policy.select(t);
    EXPECT_TRUE(is_valid_action(inst.n_items(), inst.n_slots(), a));
    policy.observe(a, sample_click(inst, a, rng));
    ++played[a.slots];
  }
  return played;
}

std::vector<int> modal(const std::map<std::vector<int>, std::int64_t>& played) {
  return std::max_element(played.begin(), played.end(),
                          [](const auto& x, const auto& y) { return x.second < y.second; })
      ->first;
}

}  // namespace

TEST(Registry, NamesAndErrors) {
  EXPECT_EQ(policy_names().size(), 7u);
  const auto inst = preset_problem("a", 100);
  SimulationRng rng(1);
  for (const auto& name : policy_names()) {
    const auto p = make_policy(name, context_for(inst, 100, policy_uses_known_bias(name)), rng);
    EXPECT_EQ(p->name(), name);
  }
  EXPECT_THROW(make_policy("greedy", context_for(inst, 100, true), rng), std::invalid_argument);
  EXPECT_THROW(make_policy("epoch-ucb", context_for(inst, 100, false), rng), std::invalid_argument);
  EXPECT_THROW(make_policy("pbucb", context_for(inst, 100, false), rng), std::invalid_argument);
  EXPECT_FALSE(policy_uses_known_bias("epoch-ucb-upb"));
  EXPECT_FALSE(policy_uses_known_bias("toprank"));
}

TEST(EpochUcb, ColdStartUsesBiasOrder) {
  const auto b = preset_problem("b", 100);
  EpochUcbKnownBias strong(context_for(b, 100, true), EpochUcbKnownBias::Width::strong);
  EXPECT_EQ(strong.begin_epoch(1), (Action{{0, 2, 1}}));
  EpochUcbKnownBias weak(context_for(b, 100, true), EpochUcbKnownBias::Width::weak);
  EXPECT_EQ(weak.begin_epoch(1), (Action{{0, 2, 1}}));
}

TEST(EpochUcb, EqualExposurePreservesRanking) {
  const auto a = preset_problem("a", 100);
  CountState s(4, 6);
  const std::int64_t clicks[] = {124, 108, 100, 92, 84, 76};  // 400 * abar
  for (int j = 0; j < 6; ++j) {
    s.item_clicks[j] = clicks[j];
    s.exposure[j] = 400.0;
  }
  s.epochs = 49;
  for (auto width : {EpochUcbKnownBias::Width::strong, EpochUcbKnownBias::Width::weak}) {
    EpochUcbKnownBias policy(context_for(a, 100, true), width);
    policy.set_counts(s);
    EXPECT_EQ(policy.begin_epoch(50), (Action{{0, 1, 2, 3}}));
    const auto& scores = policy.diagnostics().scores;
    for (int j = 1; j < 6; ++j) {
      const double w = scores[j] - clicks[j] / 400.0;
      const double w_prev = scores[j - 1] - clicks[j - 1] / 400.0;
      EXPECT_LT(w, w_prev);  // min(1, 2 abar) makes the width grow with abar
    }
  }
}

TEST(EpochUcb, ConvergesToOptimalActionOnProblemA) {
  const auto a = preset_problem("a", 50000);
  EpochUcbKnownBias policy(context_for(a, 50000, true), EpochUcbKnownBias::Width::strong);
  SimulationRng rng(0);
  const auto played = drive_epochs(policy, a, 50000, rng);
  EXPECT_EQ(modal(played), (std::vector<int>{0, 1, 2, 3}));
}

TEST(EpochUcbUpb, ColdStartUsesSlotOrder) {
  const auto b = preset_problem("b", 100);
  for (auto v : {EmWidthVariant::paper, EmWidthVariant::star}) {
    EpochUcbUnknownBias policy(context_for(b, 100, false), v);
    EXPECT_EQ(policy.begin_epoch(1), (Action{{0, 1, 2}}));
    EXPECT_EQ(policy.diagnostics().slot_weights, (std::vector<double>{1.0, 1.0, 1.0}));
  }
}

TEST(EpochUcbUpb, AdaptsToNonMonotoneBiases) {
  const auto b = preset_problem("b", 20000);
  EpochUcbUnknownBias policy(context_for(b, 20000, false), EmWidthVariant::star);
  SimulationRng rng(5);
  drive_epochs(policy, b, 20000, rng);
  const Action next = policy.begin_epoch(policy.diagnostics().decisions + 1);
  EXPECT_EQ(next[0], 3);  // best item in the top slot
  EXPECT_EQ(next[2], 2);  // second best in the third slot, which has the second largest bias
  const auto& lambda = policy.diagnostics().slot_weights;
  EXPECT_DOUBLE_EQ(lambda[0], 1.0);
  EXPECT_GT(lambda[2], lambda[1]);
  EXPECT_GT(policy.diagnostics().em_solves, 0);
}

TEST(EpochUcbUpb, UntriedItemsStayOptimistic) {
  const auto a = preset_problem("a", 100);
  EpochUcbUnknownBias policy(context_for(a, 100, false), EmWidthVariant::paper);
  SimulationRng rng(6);
  const Action first = policy.begin_epoch(1);
  policy.observe(run_epoch(a, first, 100, rng));
  const Action second = policy.begin_epoch(2);
  // Items 4 and 5 have never been shown and must be picked now.
  std::set<int> shown(second.slots.begin(), second.slots.end());
  EXPECT_TRUE(shown.count(4) && shown.count(5));
  EXPECT_TRUE(std::isinf(policy.diagnostics().scores[4]));
}

TEST(MnlBandit, ColdStartPicksDistinctUntriedCells) {
  const auto a = preset_problem("a", 100);
  MnlBanditPolicy policy(context_for(a, 100, false));
  const Action first = policy.begin_epoch(1);
  EXPECT_TRUE(is_valid_action(6, 4, first));
  SimulationRng rng(3);
  policy.observe(run_epoch(a, first, 100, rng));
  const auto idx = policy.cell_indices(2);
  for (int k = 0; k < 4; ++k) EXPECT_TRUE(std::isfinite(idx(k, first[k])));
  const Action second = policy.begin_epoch(2);
  for (int k = 0; k < 4; ++k) EXPECT_NE(second[k], first[k]) << "cell (" << k << ") retried";
}

TEST(MnlBandit, CellIndexFormula) {
  const auto a = preset_problem("a", 100);
  MnlBanditPolicy policy(context_for(a, 100, false));
  SimulationRng rng(4);
  for (int l = 1; l <= 5; ++l) policy.observe(run_epoch(a, Action{{0, 1, 2, 3}}, 1000, rng));
  const auto idx = policy.cell_indices(6);
  // Recompute cell (slot 1, item 0) from the epochs observed above.
  CountState s(4, 6);
  SimulationRng replay(4);
  for (int l = 1; l <= 5; ++l) update_counts(s, run_epoch(a, Action{{0, 1, 2, 3}}, 1000, replay));
  const double g = static_cast<double>(s.clicks(0, 0)) / 5.0;
  const double lt = std::log(6.0 * 4.0 * 36.0 / 2.0);
  EXPECT_NEAR(idx(0, 0), g + std::sqrt(4.0 * std::min(1.0, 2.0 * g) * lt / 5.0) + 4.0 * lt / 5.0,
              1e-12);
  EXPECT_TRUE(std::isinf(idx(0, 4)));
}

TEST(TopRank, FirstRoundIsUniformShuffle) {
  const auto a = preset_problem("a", 1000);
  std::vector<int> first_slot(6, 0);
  for (int seed = 0; seed < 6000; ++seed) {
    TopRankPolicy policy(context_for(a, 1000, false), SimulationRng(seed), 4.0, 0.0);
    EXPECT_EQ(policy.blocks().size(), 1u);
    ++first_slot[policy.select(1)[0]];
  }
  for (int c : first_slot) EXPECT_NEAR(c, 1000, 120);
}

TEST(TopRank, DemotesConsistentlyUnclickedItems) {
  const auto inst = make_instance({1.0, 1.0, 1.0}, {1.0, 1.0}, 1000);
  TopRankPolicy policy(context_for(inst, 1000, false), SimulationRng(1), 4.0, 0.0);
  for (int t = 1; t <= 1000; ++t) {
    const Action a = policy.select(t);
    const auto it = std::find(a.slots.begin(), a.slots.end(), 0);
    policy.observe(a, it == a.slots.end() ? ClickOutcome{0}
                                          : ClickOutcome{static_cast<int>(it - a.slots.begin()) + 1});
  }
  EXPECT_TRUE(policy.demoted(0, 1));
  EXPECT_TRUE(policy.demoted(0, 2));
  EXPECT_FALSE(policy.demoted(1, 0));
  const auto blocks = policy.blocks();
  ASSERT_GE(blocks.size(), 2u);
  EXPECT_EQ(blocks[0], (std::vector<int>{0}));
  std::set<int> all;
  for (const auto& b : blocks) all.insert(b.begin(), b.end());
  EXPECT_EQ(all.size(), 3u);
  EXPECT_EQ(policy.select(1001)[0], 0);
}

TEST(TopRank, ProblemADemotionsAgreeWithTruth) {
  const auto a = preset_problem("a", 50000);
  TopRankPolicy policy(context_for(a, 50000, false), SimulationRng(2), 4.0, 0.0);
  SimulationRng env(3);
  drive_rounds(policy, a, 50000, env);
  int demotions = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (!policy.demoted(i, j)) continue;
      ++demotions;
      EXPECT_GT(a.alpha[i], a.alpha[j]) << i << " over " << j;
    }
  }
  EXPECT_GT(demotions, 0);
  const auto blocks = policy.blocks();
  EXPECT_GE(blocks.size(), 2u);
  EXPECT_TRUE(std::find(blocks.front().begin(), blocks.front().end(), 0) != blocks.front().end());
  // The two weakest items never rank above the first block.
  for (int weak : {4, 5}) {
    EXPECT_TRUE(std::find(blocks.front().begin(), blocks.front().end(), weak) == blocks.front().end());
  }
}

TEST(TopRank, SameSeedSameActions) {
  const auto b = preset_problem("b", 3000);
  TopRankPolicy x(context_for(b, 3000, false), SimulationRng(9), 4.0, 0.0);
  TopRankPolicy y(context_for(b, 3000, false), SimulationRng(9), 4.0, 0.0);
  SimulationRng ex(1), ey(1);
  for (int t = 1; t <= 3000; ++t) {
    const Action ax = x.select(t), ay = y.select(t);
    ASSERT_EQ(ax, ay);
    x.observe(ax, sample_click(b, ax, ex));
    y.observe(ay, sample_click(b, ay, ey));
  }
}

TEST(PbUcb, ColdStartAndConvergence) {
  const auto a = preset_problem("a", 50000);
  PbUcbPolicy policy(context_for(a, 50000, true));
  EXPECT_EQ(policy.select(1), (Action{{0, 1, 2, 3}}));
  SimulationRng env(8);
  const auto played = drive_rounds(policy, a, 50000, env);
  EXPECT_EQ(modal(played), (std::vector<int>{0, 1, 2, 3}));
}

TEST(PbUcb, UnderestimatesMnlAttractiveness) {
  const auto a = preset_problem("a", 1);
  PbUcbPolicy policy(context_for(a, 1, true));
  SimulationRng env(10);
  const Action best{{0, 1, 2, 3}};
  for (int t = 0; t < 200000; ++t) policy.observe(best, sample_click(a, best, env));
  const double s = 0.46;
  for (int j = 0; j < 4; ++j) {
    EXPECT_LT(policy.theta()[j], a.alpha[j]);
    EXPECT_NEAR(policy.theta()[j], a.alpha[j] / (1.0 + s), 0.02);
  }
}

TEST(Policies, EveryActionValidAcrossProblems) {
  for (const char* problem : {"a", "b"}) {
    const auto inst = preset_problem(problem, 1500);
    for (const auto& name : policy_names()) {
      SimulationRng rng(77), env(78);
      auto policy = make_policy(name, context_for(inst, 1500, policy_uses_known_bias(name)), rng);
      if (auto* e = dynamic_cast<EpochPolicy*>(policy.get())) {
        drive_epochs(*e, inst, 1500, env);
      } else {
        drive_rounds(dynamic_cast<RoundPolicy&>(*policy), inst, 1500, env);
      }
    }
  }
}

TEST(Policies, ScalingScoresKeepsEpochAction) {
  const auto a = preset_problem("a", 1000);
  EpochUcbKnownBias policy(context_for(a, 1000, true), EpochUcbKnownBias::Width::strong);
  SimulationRng env(12);
  drive_epochs(policy, a, 1000, env);
  const Action next = policy.begin_epoch(policy.diagnostics().decisions + 1);
  auto scores = policy.diagnostics().scores;
  for (double& s : scores) s *= 3.5;
  EXPECT_EQ(optimal_action(scores, a.lambda), next);
}
