#include "mnlrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mnlrank {

void ProblemInstance::validate() const {
  if (alpha.empty() || lambda.empty()) {
    throw std::invalid_argument("problem needs at least one item and one slot");
  }
  if (lambda.size() > alpha.size()) {
    throw std::invalid_argument("more slots than items (K > J)");
  }
  if (horizon < 1) {
    throw std::invalid_argument("horizon must be at least 1");
  }
  for (double a : alpha) {
    if (!(a > 0.0 && a <= 1.0)) {
      throw std::invalid_argument("attractiveness outside (0,1]: " + std::to_string(a));
    }
  }
  for (double l : lambda) {
    if (!(l > 0.0 && l <= 1.0)) {
      throw std::invalid_argument("position bias outside (0,1]: " + std::to_string(l));
    }
  }
}

ProblemInstance make_instance(std::vector<double> alpha, std::vector<double> lambda,
                              std::int64_t horizon) {
  ProblemInstance inst{std::move(alpha), std::move(lambda), horizon};
  inst.validate();
  return inst;
}

bool is_valid_action(int n_items, int n_slots, const Action& a) {
  if (a.size() != n_slots) return false;
  std::vector<char> seen(static_cast<std::size_t>(std::max(n_items, 0)), 0);
  for (int item : a.slots) {
    if (item < 0 || item >= n_items || seen[item]) return false;
    seen[item] = 1;
  }
  return true;
}

void require_valid_action(const ProblemInstance& inst, const Action& a) {
  if (!is_valid_action(inst.n_items(), inst.n_slots(), a)) {
    throw std::invalid_argument("invalid action: needs K distinct in-range item ids");
  }
}

double attraction_sum(const ProblemInstance& inst, const Action& a) {
  double s = 0.0;
  for (int k = 0; k < a.size(); ++k) s += inst.lambda[k] * inst.alpha[a[k]];
  return s;
}

std::vector<double> click_distribution(const ProblemInstance& inst, const Action& a) {
  require_valid_action(inst, a);
  const double s = attraction_sum(inst, a);
  const double denom = 1.0 + s;
  std::vector<double> probs(static_cast<std::size_t>(a.size()) + 1);
  double clicks = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    probs[k + 1] = inst.lambda[k] * inst.alpha[a[k]] / denom;
    clicks += probs[k + 1];
  }
  probs[0] = 1.0 - clicks;
  return probs;
}

double expected_reward(const ProblemInstance& inst, const Action& a) {
  require_valid_action(inst, a);
  const double s = attraction_sum(inst, a);
  return s / (1.0 + s);
}

namespace {

std::vector<int> descending_order(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return values[x] > values[y]; });
  return order;
}

}  // namespace

Action optimal_action(std::span<const double> scores, std::span<const double> biases) {
  if (biases.size() > scores.size()) {
    throw std::invalid_argument("optimal_action: more slots than items");
  }
  const auto items = descending_order(scores);
  const auto slots = descending_order(biases);
  Action a;
  a.slots.assign(biases.size(), -1);
  for (std::size_t rank = 0; rank < slots.size(); ++rank) {
    a.slots[slots[rank]] = items[rank];
  }
  return a;
}

double lower_bound_value(const ProblemInstance& inst) {
  double s1 = 0.0, s2 = 0.0;
  for (double l : inst.lambda) {
    s1 += l;
    s2 += l * l;
  }
  return std::sqrt(static_cast<double>(inst.n_items()) * static_cast<double>(inst.horizon) *
                   s2 * s2 / s1);
}

}  // namespace mnlrank
