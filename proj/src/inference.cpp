#include "mnlrank/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mnlrank {

CountState::CountState(int n_slots, int n_items)
    : clicks(n_slots, n_items, 0),
      placements(n_slots, n_items, 0),
      exposure(static_cast<std::size_t>(n_items), 0.0),
      item_clicks(static_cast<std::size_t>(n_items), 0) {}

std::int64_t CountState::displays(int item) const {
  std::int64_t d = 0;
  for (int k = 0; k < n_slots(); ++k) d += placements(k, item);
  return d;
}

void update_counts(CountState& state, const EpochRecord& epoch, std::span<const double> known_bias) {
  if (epoch.action.size() != state.n_slots() ||
      !is_valid_action(state.n_items(), state.n_slots(), epoch.action)) {
    throw std::invalid_argument("update_counts: epoch action does not fit the state");
  }
  if (!known_bias.empty() && static_cast<int>(known_bias.size()) != state.n_slots()) {
    throw std::invalid_argument("update_counts: bias vector has the wrong length");
  }
  for (int k = 0; k < state.n_slots(); ++k) {
    const int j = epoch.action[k];
    state.clicks(k, j) += epoch.slot_clicks[k];
    state.placements(k, j) += 1;
    state.item_clicks[j] += epoch.slot_clicks[k];
    if (!known_bias.empty()) state.exposure[j] += known_bias[k];
  }
  ++state.epochs;
}

std::vector<double> alpha_bar(const CountState& state) {
  std::vector<double> out(static_cast<std::size_t>(state.n_items()), 0.0);
  for (int j = 0; j < state.n_items(); ++j) {
    if (state.exposure[j] > 0.0) out[j] = static_cast<double>(state.item_clicks[j]) / state.exposure[j];
  }
  return out;
}

Grid<double> gamma_bar(const CountState& state) {
  Grid<double> out(state.n_slots(), state.n_items(), 0.0);
  for (int k = 0; k < state.n_slots(); ++k) {
    for (int j = 0; j < state.n_items(); ++j) {
      if (state.placements(k, j) > 0) {
        out(k, j) = static_cast<double>(state.clicks(k, j)) /
                    static_cast<double>(state.placements(k, j));
      }
    }
  }
  return out;
}

double log_likelihood(const CountState& state, std::span<const double> alpha,
                      std::span<const double> lambda) {
  if (static_cast<int>(alpha.size()) != state.n_items() ||
      static_cast<int>(lambda.size()) != state.n_slots()) {
    throw std::invalid_argument("log_likelihood: parameter dimensions do not match the counts");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("log_likelihood: attractiveness must be positive");
  }
  for (double l : lambda) {
    if (!(l > 0.0)) throw std::invalid_argument("log_likelihood: position bias must be positive");
  }
  double ll = 0.0;
  for (int k = 0; k < state.n_slots(); ++k) {
    for (int j = 0; j < state.n_items(); ++j) {
      const double g = alpha[j] * lambda[k];
      const auto n = static_cast<double>(state.clicks(k, j));
      const auto nt = static_cast<double>(state.placements(k, j));
      if (n > 0.0) ll += n * std::log(g);
      ll -= (n + nt) * std::log1p(g);
    }
  }
  return ll;
}

EmData EmData::from_counts(const CountState& state) {
  EmData data;
  data.clicks = Grid<double>(state.n_slots(), state.n_items(), 0.0);
  data.displays.assign(static_cast<std::size_t>(state.n_items()), 0.0);
  for (int k = 0; k < state.n_slots(); ++k) {
    for (int j = 0; j < state.n_items(); ++j) {
      data.clicks(k, j) = static_cast<double>(state.clicks(k, j));
      data.displays[j] += static_cast<double>(state.placements(k, j));
    }
  }
  data.epochs = static_cast<double>(state.epochs);
  return data;
}

EmEstimate em_fit(const EmData& data, std::span<const double> init_alpha,
                  std::span<const double> init_lambda, const EmOptions& options) {
  const int n_slots = data.clicks.rows();
  const int n_items = data.clicks.cols();
  if (static_cast<int>(init_alpha.size()) != n_items ||
      static_cast<int>(init_lambda.size()) != n_slots) {
    throw std::invalid_argument("em_fit: initial values have the wrong dimensions");
  }
  if (!(options.tolerance > 0.0 && options.tolerance < 1.0)) {
    throw std::invalid_argument("em_fit: tolerance must lie in (0,1)");
  }
  if (!(data.epochs >= 1.0)) throw std::invalid_argument("em_fit: needs at least one epoch");

  const double eps = options.floor;
  EmEstimate est;
  est.alpha.assign(init_alpha.begin(), init_alpha.end());
  est.lambda.assign(init_lambda.begin(), init_lambda.end());
  for (double& a : est.alpha) a = std::max(a, eps);
  for (double& l : est.lambda) l = std::max(l, eps);
  est.lambda[0] = 1.0;

  std::vector<double> inv_lambda(static_cast<std::size_t>(n_slots));
  std::vector<double> inv_alpha(static_cast<std::size_t>(n_items));
  std::vector<double> alpha_sum(static_cast<std::size_t>(n_items));
  const double inv_epochs = 1.0 / data.epochs;

  while (est.iterations < options.max_iter) {
    ++est.iterations;
    double change = 0.0;

    for (int j = 0; j < n_items; ++j) inv_alpha[j] = 1.0 / est.alpha[j];
    inv_lambda[0] = 1.0;
    for (int k = 1; k < n_slots; ++k) {
      double s = 0.0;
      for (int j = 0; j < n_items; ++j) s += data.clicks(k, j) * inv_alpha[j];
      const double next = std::max(eps, s * inv_epochs);
      change = std::max(change, std::abs(next - est.lambda[k]));
      est.lambda[k] = next;
      inv_lambda[k] = 1.0 / next;
    }

    std::fill(alpha_sum.begin(), alpha_sum.end(), 0.0);
    for (int k = 0; k < n_slots; ++k) {
      for (int j = 0; j < n_items; ++j) alpha_sum[j] += data.clicks(k, j) * inv_lambda[k];
    }
    for (int j = 0; j < n_items; ++j) {
      const double next =
          data.displays[j] > 0.0 ? std::max(eps, alpha_sum[j] / data.displays[j]) : eps;
      change = std::max(change, std::abs(next - est.alpha[j]));
      est.alpha[j] = next;
    }

    if (options.on_iteration) options.on_iteration(est.alpha, est.lambda);
    if (change <= options.tolerance) {
      est.converged = true;
      break;
    }
  }
  return est;
}

EmEstimate em_fit(const CountState& state, std::span<const double> init_alpha,
                  std::span<const double> init_lambda, const EmOptions& options) {
  return em_fit(EmData::from_counts(state), init_alpha, init_lambda, options);
}

EmEstimate em_fit(const CountState& state, const EmOptions& options) {
  const std::vector<double> alpha(static_cast<std::size_t>(state.n_items()), 0.5);
  std::vector<double> lambda(static_cast<std::size_t>(state.n_slots()), 0.5);
  lambda[0] = 1.0;
  return em_fit(state, alpha, lambda, options);
}

}  // namespace mnlrank
