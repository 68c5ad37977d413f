#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mnlrank/environment.hpp"
#include "mnlrank/grid.hpp"

namespace mnlrank {

// Sufficient statistics of an epoch history. Matrices are slots x items.
struct CountState {
  CountState() = default;
  CountState(int n_slots, int n_items);

  Grid<std::int64_t> clicks;      // N_kj: clicks on slot k while item j held it
  Grid<std::int64_t> placements;  // Ntilde_kj: epochs with item j in slot k
  std::vector<double> exposure;   // Lambda_j: summed known bias of j's slots
  std::vector<std::int64_t> item_clicks;
  std::int64_t epochs = 0;

  int n_slots() const { return clicks.rows(); }
  int n_items() const { return clicks.cols(); }
  // Number of epochs in which item j was shown in any slot.
  std::int64_t displays(int item) const;
};

// Adds one epoch. When known_bias is non-empty it also accumulates exposure.
void update_counts(CountState& state, const EpochRecord& epoch,
                   std::span<const double> known_bias = {});

// Known-bias estimator item_clicks_j / Lambda_j; 0 for items never shown.
std::vector<double> alpha_bar(const CountState& state);

// Product estimator N_kj / Ntilde_kj with 0/0 = 0.
Grid<double> gamma_bar(const CountState& state);

// Pseudo log-likelihood sum_kj N log(alpha_j lambda_k) - (N + Ntilde) log(1 + alpha_j lambda_k).
// Throws std::invalid_argument on non-positive parameters.
double log_likelihood(const CountState& state, std::span<const double> alpha,
                      std::span<const double> lambda);

struct EmOptions {
  double tolerance = 1e-6;  // stop once the largest parameter move is <= this
  int max_iter = 10'000;
  double floor = 1e-6;      // lower clamp for every estimate
  // Called after every iteration with the current (alpha, lambda).
  std::function<void(std::span<const double>, std::span<const double>)> on_iteration;
};

struct EmEstimate {
  std::vector<double> alpha;
  std::vector<double> lambda;  // lambda[0] is pinned to 1
  int iterations = 0;
  bool converged = false;
};

// The inputs the EM iteration actually reads, as doubles so that finite
// difference perturbations can be applied in place.
struct EmData {
  Grid<double> clicks;
  std::vector<double> displays;  // epochs in which each item was shown
  double epochs = 0.0;

  static EmData from_counts(const CountState& state);
};

// Alternates the position-bias update
//   lambda_k = (1/L) sum_j N_kj / alpha_j         (k >= 2, lambda_1 = 1)
// and the attractiveness update
//   alpha_j = (sum_k N_kj / lambda_k) / displays_j
// until the largest change is within tolerance. Non-convergence is reported
// through the converged flag; the last iterate is returned either way.
EmEstimate em_fit(const EmData& data, std::span<const double> init_alpha,
                  std::span<const double> init_lambda, const EmOptions& options = {});

EmEstimate em_fit(const CountState& state, std::span<const double> init_alpha,
                  std::span<const double> init_lambda, const EmOptions& options = {});

// em_fit from the default starting point (all parameters 0.5, lambda_1 = 1).
EmEstimate em_fit(const CountState& state, const EmOptions& options = {});

}  // namespace mnlrank
