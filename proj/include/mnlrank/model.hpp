#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mnlrank {

// Items and slots are 0-based in the library. Slot k of an action holds the
// item shown in the k-th position of the ranked list.
struct Action {
  std::vector<int> slots;

  int size() const { return static_cast<int>(slots.size()); }
  int operator[](int k) const { return slots[k]; }
  bool operator==(const Action&) const = default;
};

// Outcome of one round: 0 is the no-click event, k >= 1 is a click on slot k-1.
struct ClickOutcome {
  int value = 0;

  bool is_click() const { return value != 0; }
  int slot() const { return value - 1; }
};

// Ground truth of a simulated MNL ranking problem.
struct ProblemInstance {
  std::vector<double> alpha;   // attractiveness per item, in (0, 1]
  std::vector<double> lambda;  // position bias per slot, in (0, 1]; unsorted
  std::int64_t horizon = 1;

  int n_items() const { return static_cast<int>(alpha.size()); }
  int n_slots() const { return static_cast<int>(lambda.size()); }

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

ProblemInstance make_instance(std::vector<double> alpha, std::vector<double> lambda,
                              std::int64_t horizon);

bool is_valid_action(int n_items, int n_slots, const Action& a);
void require_valid_action(const ProblemInstance& inst, const Action& a);

// Sum over slots of lambda_k * alpha_{a_k}; the MNL weight of the click options.
double attraction_sum(const ProblemInstance& inst, const Action& a);

// Entry 0 is P(no click); entry k >= 1 is P(click on slot k-1).
std::vector<double> click_distribution(const ProblemInstance& inst, const Action& a);

// P(any click) = S / (1 + S).
double expected_reward(const ProblemInstance& inst, const Action& a);

// Pairs items in descending score order with slots in descending bias order,
// which maximises sum_k biases[k] * scores[a_k] and therefore the MNL reward.
// Ties go to the lower index. Scores may be +infinity.
Action optimal_action(std::span<const double> scores, std::span<const double> biases);

// sqrt(J T S_{K,2}^2 / S_K), the order of the minimax lower bound.
double lower_bound_value(const ProblemInstance& inst);

// Per-round expected regret r(a*) - r(a_t) accumulated over a run.
struct RegretTrace {
  std::vector<double> per_round;
  std::vector<double> cumulative;

  void push(double regret) {
    per_round.push_back(regret);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + regret);
  }
  std::size_t rounds() const { return cumulative.size(); }
  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

}  // namespace mnlrank
