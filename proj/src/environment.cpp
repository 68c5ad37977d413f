#include "mnlrank/environment.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mnlrank {

std::int64_t EpochRecord::total_clicks() const {
  return std::accumulate(slot_clicks.begin(), slot_clicks.end(), std::int64_t{0});
}

ClickSampler::ClickSampler(const ProblemInstance& inst, const Action& a) {
  require_valid_action(inst, a);
  cumulative_.reserve(a.slots.size());
  for (int k = 0; k < a.size(); ++k) {
    total_ += inst.lambda[k] * inst.alpha[a[k]];
    cumulative_.push_back(total_);
  }
}

ClickOutcome ClickSampler::draw(SimulationRng& rng) const {
  // Scale a uniform to the unnormalised weights: [0,1) is the no-click mass.
  const double u = rng.uniform() * (1.0 + total_);
  if (u < 1.0) return {0};
  const double v = u - 1.0;
  for (std::size_t k = 0; k < cumulative_.size(); ++k) {
    if (v < cumulative_[k]) return {static_cast<int>(k) + 1};
  }
  return {static_cast<int>(cumulative_.size())};
}

ClickOutcome sample_click(const ProblemInstance& inst, const Action& a, SimulationRng& rng) {
  return ClickSampler(inst, a).draw(rng);
}

EpochRecord run_epoch(const ProblemInstance& inst, const Action& a, std::int64_t rounds_left,
                      SimulationRng& rng) {
  if (rounds_left < 1) throw std::invalid_argument("run_epoch: rounds_left must be >= 1");
  const ClickSampler sampler(inst, a);
  EpochRecord rec{a, std::vector<std::int64_t>(a.slots.size(), 0), 0, true};
  while (rec.length < rounds_left) {
    ++rec.length;
    const ClickOutcome q = sampler.draw(rng);
    if (!q.is_click()) {
      rec.truncated = false;
      break;
    }
    ++rec.slot_clicks[q.slot()];
  }
  return rec;
}

std::int64_t sample_geometric(double p, SimulationRng& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sample_geometric: p outside (0,1]");
  if (p == 1.0) return 0;
  // Inversion: floor(log U / log(1 - p)) with U in (0, 1].
  return static_cast<std::int64_t>(std::floor(std::log(rng.uniform_positive()) / std::log1p(-p)));
}

EpochRecord sample_epoch_fast(const ProblemInstance& inst, const Action& a, SimulationRng& rng) {
  require_valid_action(inst, a);
  const double s = attraction_sum(inst, a);
  EpochRecord rec{a, std::vector<std::int64_t>(a.slots.size(), 0), 1, false};
  const std::int64_t clicks = sample_geometric(1.0 / (1.0 + s), rng);
  // Conditional on the total, slot shares are multinomial with weights
  // lambda_k alpha_{a_k} / S; allocate slot by slot with binomial splits.
  std::int64_t remaining = clicks;
  double mass_left = s;
  for (int k = 0; k < a.size() && remaining > 0; ++k) {
    const double w = inst.lambda[k] * inst.alpha[a[k]];
    if (k + 1 == a.size()) {
      rec.slot_clicks[k] = remaining;
      break;
    }
    const double q = std::min(1.0, w / mass_left);
    std::int64_t taken = 0;
    for (std::int64_t i = 0; i < remaining; ++i) {
      if (rng.uniform() < q) ++taken;
    }
    rec.slot_clicks[k] = taken;
    remaining -= taken;
    mass_left -= w;
  }
  rec.length = clicks + 1;
  return rec;
}

}  // namespace mnlrank
