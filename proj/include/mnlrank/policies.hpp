#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mnlrank/concentration.hpp"
#include "mnlrank/environment.hpp"
#include "mnlrank/inference.hpp"
#include "mnlrank/rng.hpp"

namespace mnlrank {

// What a policy is told about the problem before the first round.
struct PolicyContext {
  int n_items = 0;
  int n_slots = 0;
  std::int64_t horizon = 1;
  std::vector<double> known_bias;  // empty for policies that must not see it
};

// Tunables of the comparator policies and the EM solver. TopRank's constants
// come from its original description: delta defaults to 1/T when left at 0.
struct PolicyConfig {
  EmOptions em;
  double toprank_c = 4.0;
  double toprank_delta = 0.0;
};

struct PolicyDiagnostics {
  std::int64_t decisions = 0;          // epochs for epoch policies, rounds otherwise
  std::int64_t em_solves = 0;
  std::int64_t em_iterations = 0;
  std::int64_t em_nonconverged = 0;
  std::vector<double> scores;          // last UCB index per item
  std::vector<double> slot_weights;    // last bias vector used to rank slots
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  const PolicyDiagnostics& diagnostics() const { return diag_; }

 protected:
  PolicyDiagnostics diag_;
};

// Chooses an action at each epoch boundary; the environment repeats it until
// the first no-click and reports the whole epoch back.
class EpochPolicy : public Policy {
 public:
  virtual Action begin_epoch(std::int64_t epoch) = 0;
  virtual void observe(const EpochRecord& epoch) = 0;
};

// Chooses a fresh action every round.
class RoundPolicy : public Policy {
 public:
  virtual Action select(std::int64_t round) = 0;
  virtual void observe(const Action& shown, ClickOutcome outcome) = 0;
};

// Epoch-UCB with known position biases (Bernstein widths) or the weaker
// Epoch-UCB-W coefficients.
class EpochUcbKnownBias final : public EpochPolicy {
 public:
  enum class Width { strong, weak };

  EpochUcbKnownBias(const PolicyContext& ctx, Width width);

  std::string_view name() const override;
  Action begin_epoch(std::int64_t epoch) override;
  void observe(const EpochRecord& epoch) override;

  const CountState& counts() const { return counts_; }
  // Replaces the accumulated counts; used to probe the index rule directly.
  void set_counts(CountState counts) { counts_ = std::move(counts); }

 private:
  PolicyContext ctx_;
  Width width_;
  CountState counts_;
};

// Epoch-UCB for unknown position biases: EM estimates plus a beta1-smoothness
// width from one perturbed EM solve per explored (slot, item) cell.
class EpochUcbUnknownBias final : public EpochPolicy {
 public:
  EpochUcbUnknownBias(const PolicyContext& ctx, EmWidthVariant variant, EmOptions em = {});

  std::string_view name() const override;
  Action begin_epoch(std::int64_t epoch) override;
  void observe(const EpochRecord& epoch) override;

  const CountState& counts() const { return counts_; }
  const EmEstimate& last_estimate() const { return estimate_; }

 private:
  PolicyContext ctx_;
  EmWidthVariant variant_;
  EmOptions em_;
  CountState counts_;
  EmEstimate estimate_;
};

// Treats every (item, slot) pair as an independent MNL-bandit object and
// solves the slot/item assignment over per-cell UCBs.
class MnlBanditPolicy final : public EpochPolicy {
 public:
  explicit MnlBanditPolicy(const PolicyContext& ctx);

  std::string_view name() const override { return "mnl-bandit"; }
  Action begin_epoch(std::int64_t epoch) override;
  void observe(const EpochRecord& epoch) override;

  // Per-cell UCBs at epoch l (slots x items); +infinity for untried cells.
  Grid<double> cell_indices(std::int64_t epoch) const;

 private:
  PolicyContext ctx_;
  CountState counts_;
};

// Plays one fixed action forever. Used for the oracle baseline and tests.
class FixedActionPolicy final : public EpochPolicy {
 public:
  FixedActionPolicy(Action action, std::string name);

  std::string_view name() const override { return name_; }
  Action begin_epoch(std::int64_t) override;
  void observe(const EpochRecord&) override {}

 private:
  Action action_;
  std::string name_;
};

// TopRank: items live in a stack of blocks; each round shows a uniformly
// shuffled concatenation of the blocks, and an item is demoted below another
// in its block once its click deficit passes a confidence threshold.
class TopRankPolicy final : public RoundPolicy {
 public:
  TopRankPolicy(const PolicyContext& ctx, SimulationRng rng, double c, double delta);

  std::string_view name() const override { return "toprank"; }
  Action select(std::int64_t round) override;
  void observe(const Action& shown, ClickOutcome outcome) override;

  // Current blocks, best first.
  std::vector<std::vector<int>> blocks() const;
  bool demoted(int winner, int loser) const;

 private:
  PolicyContext ctx_;
  SimulationRng rng_;
  double c_;
  double delta_;
  Grid<double> diff_;      // S_ij: clicks on i minus clicks on j, same-block rounds
  Grid<double> decisive_;  // N_ij: same-block rounds where exactly one was clicked
  Grid<char> beats_;       // beats_(i, j): j has been demoted below i
  std::vector<int> block_of_;
};

// Position-based-model UCB with known biases: theta_j = clicks_j / Lambda_j and
// index theta_j + sqrt(N_j / Lambda_j) sqrt(log t / (2 N_j)).
class PbUcbPolicy final : public RoundPolicy {
 public:
  explicit PbUcbPolicy(const PolicyContext& ctx);

  std::string_view name() const override { return "pbucb"; }
  Action select(std::int64_t round) override;
  void observe(const Action& shown, ClickOutcome outcome) override;

  const std::vector<double>& theta() const { return theta_; }

 private:
  PolicyContext ctx_;
  std::vector<double> clicks_;
  std::vector<double> displays_;
  std::vector<double> exposure_;
  std::vector<double> theta_;
};

// The seven named policies, in reporting order.
const std::vector<std::string>& policy_names();

// Whether the named policy is given the true position biases.
bool policy_uses_known_bias(std::string_view name);

// Builds a named policy. `rng` seeds any internal randomisation.
// Throws std::invalid_argument for unknown names.
std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyContext& ctx,
                                    SimulationRng rng, const PolicyConfig& config = {});

}  // namespace mnlrank
