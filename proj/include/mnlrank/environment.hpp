#pragma once

#include <cstdint>
#include <vector>

#include "mnlrank/model.hpp"
#include "mnlrank/rng.hpp"

namespace mnlrank {

// One epoch: an action shown repeatedly until the first no-click round.
struct EpochRecord {
  Action action;
  std::vector<std::int64_t> slot_clicks;  // clicks per slot during the epoch
  std::int64_t length = 0;                // rounds consumed
  bool truncated = false;                 // ended by the horizon, not a no-click

  std::int64_t total_clicks() const;
  bool operator==(const EpochRecord&) const = default;
};

// Categorical sampler over {no-click, slot 1..K} for a fixed action. Built once
// per epoch so repeated rounds do not recompute the MNL weights.
class ClickSampler {
 public:
  ClickSampler(const ProblemInstance& inst, const Action& a);

  ClickOutcome draw(SimulationRng& rng) const;

  double no_click_probability() const { return 1.0 / (1.0 + total_); }

 private:
  std::vector<double> cumulative_;  // running sums of lambda_k * alpha_{a_k}
  double total_ = 0.0;
};

ClickOutcome sample_click(const ProblemInstance& inst, const Action& a, SimulationRng& rng);

// Plays `a` round by round until a no-click or until rounds_left is used up.
EpochRecord run_epoch(const ProblemInstance& inst, const Action& a, std::int64_t rounds_left,
                      SimulationRng& rng);

// Same law as an untruncated run_epoch, drawn as Geometric total clicks split
// multinomially across slots.
EpochRecord sample_epoch_fast(const ProblemInstance& inst, const Action& a, SimulationRng& rng);

// Geometric on {0, 1, 2, ...} with P(X = x) = (1 - p)^x p.
std::int64_t sample_geometric(double p, SimulationRng& rng);

}  // namespace mnlrank
