#include "mnlrank/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mnlrank/assignment.hpp"

namespace mnlrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_known_bias(const PolicyContext& ctx, std::string_view who) {
  if (static_cast<int>(ctx.known_bias.size()) != ctx.n_slots) {
    throw std::invalid_argument(std::string(who) + " needs the true position biases");
  }
}

}  // namespace

// --- Epoch-UCB, known biases ------------------------------------------------

EpochUcbKnownBias::EpochUcbKnownBias(const PolicyContext& ctx, Width width)
    : ctx_(ctx), width_(width), counts_(ctx.n_slots, ctx.n_items) {
  require_known_bias(ctx_, "epoch-ucb");
}

std::string_view EpochUcbKnownBias::name() const {
  return width_ == Width::strong ? "epoch-ucb" : "epoch-ucb-w";
}

Action EpochUcbKnownBias::begin_epoch(std::int64_t epoch) {
  const auto abar = alpha_bar(counts_);
  std::vector<double> scores(abar.size());
  for (int j = 0; j < ctx_.n_items; ++j) {
    const UcbWidthParams p{ctx_.n_items, epoch, counts_.exposure[j], abar[j]};
    const double w = width_ == Width::strong ? ucb_width_known(p) : ucb_width_weak(p);
    scores[j] = std::isinf(w) ? kInf : abar[j] + w;
  }
  ++diag_.decisions;
  diag_.slot_weights = ctx_.known_bias;
  diag_.scores = scores;
  return optimal_action(scores, ctx_.known_bias);
}

void EpochUcbKnownBias::observe(const EpochRecord& epoch) {
  update_counts(counts_, epoch, ctx_.known_bias);
}

// --- Epoch-UCB, unknown biases -----------------------------------------------

EpochUcbUnknownBias::EpochUcbUnknownBias(const PolicyContext& ctx, EmWidthVariant variant,
                                         EmOptions em)
    : ctx_(ctx), variant_(variant), em_(std::move(em)), counts_(ctx.n_slots, ctx.n_items) {
  estimate_.alpha.assign(static_cast<std::size_t>(ctx.n_items), 0.5);
  estimate_.lambda.assign(static_cast<std::size_t>(ctx.n_slots), 0.5);
  estimate_.lambda[0] = 1.0;
}

std::string_view EpochUcbUnknownBias::name() const {
  return variant_ == EmWidthVariant::paper ? "epoch-ucb-upb" : "epoch-ucb-star-upb";
}

Action EpochUcbUnknownBias::begin_epoch(std::int64_t epoch) {
  ++diag_.decisions;
  std::vector<double> scores(static_cast<std::size_t>(ctx_.n_items), kInf);
  if (counts_.epochs == 0) {
    diag_.scores = scores;
    diag_.slot_weights.assign(static_cast<std::size_t>(ctx_.n_slots), 1.0);
    return optimal_action(scores, diag_.slot_weights);
  }

  // Warm start from the previous epoch's fixed point.
  estimate_ = em_fit(counts_, estimate_.alpha, estimate_.lambda, em_);
  const Beta1Result beta = beta1_squared(counts_, estimate_, em_, PerturbedStart::warm);

  ++diag_.em_solves;
  diag_.em_solves += beta.perturbed_solves;
  diag_.em_iterations += estimate_.iterations;
  diag_.em_nonconverged += (estimate_.converged ? 0 : 1) + beta.nonconverged_solves;

  for (int j = 0; j < ctx_.n_items; ++j) {
    if (counts_.displays(j) == 0) continue;
    scores[j] = estimate_.alpha[j] + ucb_width_em(beta.beta1_sq[j], ctx_.n_items, epoch, variant_);
  }
  diag_.scores = scores;
  diag_.slot_weights = estimate_.lambda;
  return optimal_action(scores, estimate_.lambda);
}

void EpochUcbUnknownBias::observe(const EpochRecord& epoch) { update_counts(counts_, epoch); }

// --- MNL-bandit over (item, slot) objects ------------------------------------

MnlBanditPolicy::MnlBanditPolicy(const PolicyContext& ctx)
    : ctx_(ctx), counts_(ctx.n_slots, ctx.n_items) {}

Grid<double> MnlBanditPolicy::cell_indices(std::int64_t epoch) const {
  const auto gbar = gamma_bar(counts_);
  const double l = static_cast<double>(epoch);
  const double log_term =
      std::max(0.0, std::log(static_cast<double>(ctx_.n_items) * ctx_.n_slots * l * l / 2.0));
  Grid<double> ucb(ctx_.n_slots, ctx_.n_items, kInf);
  for (int k = 0; k < ctx_.n_slots; ++k) {
    for (int j = 0; j < ctx_.n_items; ++j) {
      const auto shown = static_cast<double>(counts_.placements(k, j));
      if (shown == 0.0) continue;
      const double g = gbar(k, j);
      ucb(k, j) = g + std::sqrt(4.0 * std::min(1.0, 2.0 * g) * log_term / shown) +
                  4.0 * log_term / shown;
    }
  }
  return ucb;
}

Action MnlBanditPolicy::begin_epoch(std::int64_t epoch) {
  ++diag_.decisions;
  return Action{solve_assignment(cell_indices(epoch))};
}

void MnlBanditPolicy::observe(const EpochRecord& epoch) { update_counts(counts_, epoch); }

// --- Fixed action -------------------------------------------------------------

FixedActionPolicy::FixedActionPolicy(Action action, std::string name)
    : action_(std::move(action)), name_(std::move(name)) {}

Action FixedActionPolicy::begin_epoch(std::int64_t) {
  ++diag_.decisions;
  return action_;
}

// --- TopRank ------------------------------------------------------------------

TopRankPolicy::TopRankPolicy(const PolicyContext& ctx, SimulationRng rng, double c, double delta)
    : ctx_(ctx),
      rng_(rng),
      c_(c),
      delta_(delta > 0.0 ? delta : 1.0 / static_cast<double>(ctx.horizon)),
      diff_(ctx.n_items, ctx.n_items, 0.0),
      decisive_(ctx.n_items, ctx.n_items, 0.0),
      beats_(ctx.n_items, ctx.n_items, 0),
      block_of_(static_cast<std::size_t>(ctx.n_items), 0) {}

std::vector<std::vector<int>> TopRankPolicy::blocks() const {
  std::vector<std::vector<int>> out;
  std::vector<char> placed(static_cast<std::size_t>(ctx_.n_items), 0);
  int remaining = ctx_.n_items;
  while (remaining > 0) {
    std::vector<int> block;
    for (int j = 0; j < ctx_.n_items; ++j) {
      if (placed[j]) continue;
      bool dominated = false;
      for (int i = 0; i < ctx_.n_items && !dominated; ++i) {
        dominated = !placed[i] && beats_(i, j);
      }
      if (!dominated) block.push_back(j);
    }
    if (block.empty()) {
      // A demotion cycle leaves no undominated item; keep the rest together.
      for (int j = 0; j < ctx_.n_items; ++j) {
        if (!placed[j]) block.push_back(j);
      }
    }
    for (int j : block) placed[j] = 1;
    remaining -= static_cast<int>(block.size());
    out.push_back(std::move(block));
  }
  return out;
}

bool TopRankPolicy::demoted(int winner, int loser) const { return beats_(winner, loser) != 0; }

Action TopRankPolicy::select(std::int64_t) {
  ++diag_.decisions;
  Action a;
  a.slots.reserve(static_cast<std::size_t>(ctx_.n_slots));
  int block_index = 0;
  for (auto& block : blocks()) {
    for (int j : block) block_of_[j] = block_index;
    ++block_index;
    if (a.size() >= ctx_.n_slots) continue;
    shuffle(block.begin(), block.end(), rng_);
    for (int j : block) {
      if (a.size() == ctx_.n_slots) break;
      a.slots.push_back(j);
    }
  }
  return a;
}

void TopRankPolicy::observe(const Action& shown, ClickOutcome outcome) {
  if (!outcome.is_click()) return;
  // Only pairs containing the clicked item have a non-zero click difference.
  const int winner = shown[outcome.slot()];
  const int block = block_of_[winner];
  for (int j = 0; j < ctx_.n_items; ++j) {
    if (j == winner || block_of_[j] != block) continue;
    diff_(winner, j) += 1.0;
    diff_(j, winner) -= 1.0;
    decisive_(winner, j) += 1.0;
    decisive_(j, winner) += 1.0;
    const double n = decisive_(winner, j);
    const double threshold = std::sqrt(2.0 * n * std::log(c_ * std::sqrt(n) / delta_));
    if (diff_(winner, j) >= threshold) beats_(winner, j) = 1;
  }
}

// --- PBUCB --------------------------------------------------------------------

PbUcbPolicy::PbUcbPolicy(const PolicyContext& ctx)
    : ctx_(ctx),
      clicks_(static_cast<std::size_t>(ctx.n_items), 0.0),
      displays_(static_cast<std::size_t>(ctx.n_items), 0.0),
      exposure_(static_cast<std::size_t>(ctx.n_items), 0.0),
      theta_(static_cast<std::size_t>(ctx.n_items), 0.0) {
  require_known_bias(ctx_, "pbucb");
}

Action PbUcbPolicy::select(std::int64_t round) {
  ++diag_.decisions;
  const double log_t = std::log(static_cast<double>(std::max<std::int64_t>(round, 1)));
  std::vector<double> index(static_cast<std::size_t>(ctx_.n_items), kInf);
  for (int j = 0; j < ctx_.n_items; ++j) {
    if (displays_[j] == 0.0) continue;
    index[j] = theta_[j] + std::sqrt(displays_[j] / exposure_[j]) *
                               std::sqrt(log_t / (2.0 * displays_[j]));
  }
  diag_.scores = index;
  return optimal_action(index, ctx_.known_bias);
}

void PbUcbPolicy::observe(const Action& shown, ClickOutcome outcome) {
  for (int k = 0; k < shown.size(); ++k) {
    const int j = shown[k];
    displays_[j] += 1.0;
    exposure_[j] += ctx_.known_bias[k];
    if (outcome.is_click() && outcome.slot() == k) clicks_[j] += 1.0;
    theta_[j] = clicks_[j] / exposure_[j];
  }
}

// --- Registry -----------------------------------------------------------------

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {
      "epoch-ucb", "epoch-ucb-w", "epoch-ucb-upb", "epoch-ucb-star-upb",
      "mnl-bandit", "toprank",    "pbucb"};
  return names;
}

bool policy_uses_known_bias(std::string_view name) {
  return name == "epoch-ucb" || name == "epoch-ucb-w" || name == "pbucb";
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyContext& ctx,
                                    SimulationRng rng, const PolicyConfig& config) {
  if (name == "epoch-ucb") {
    return std::make_unique<EpochUcbKnownBias>(ctx, EpochUcbKnownBias::Width::strong);
  }
  if (name == "epoch-ucb-w") {
    return std::make_unique<EpochUcbKnownBias>(ctx, EpochUcbKnownBias::Width::weak);
  }
  if (name == "epoch-ucb-upb") {
    return std::make_unique<EpochUcbUnknownBias>(ctx, EmWidthVariant::paper, config.em);
  }
  if (name == "epoch-ucb-star-upb") {
    return std::make_unique<EpochUcbUnknownBias>(ctx, EmWidthVariant::star, config.em);
  }
  if (name == "mnl-bandit") return std::make_unique<MnlBanditPolicy>(ctx);
  if (name == "toprank") {
    return std::make_unique<TopRankPolicy>(ctx, rng, config.toprank_c, config.toprank_delta);
  }
  if (name == "pbucb") return std::make_unique<PbUcbPolicy>(ctx);
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

}  // namespace mnlrank
