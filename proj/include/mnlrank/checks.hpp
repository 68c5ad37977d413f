#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mnlrank/model.hpp"
#include "mnlrank/rng.hpp"

namespace mnlrank {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Pearson goodness of fit against a discrete law. Adjacent bins are merged from
// the right until each expected count is at least 5; the last probability is
// taken as the remaining tail mass. Returns the upper-tail p-value.
double chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs);

// Pearson test that two count vectors over the same bins share one law.
double chi_square_homogeneity(std::span<const std::int64_t> x, std::span<const std::int64_t> y);

// P(X = 0..max_value-1) and the tail P(X >= max_value) for Geometric(p) on {0,1,...}.
std::vector<double> geometric_pmf_with_tail(double p, int max_value);

struct DistributionalOptions {
  std::uint64_t seed = 20240601;
  std::int64_t epochs = 100'000;
  double significance = 0.01;
};
std::vector<CheckResult> distributional_suite(const DistributionalOptions& options = {});

struct ConcentrationOptions {
  std::uint64_t seed = 20240602;
  std::int64_t trials = 100'000;
  int n = 200;
  double c = 100.0;
  std::int64_t coverage_trials = 20'000;
};

// Empirical rates of |sum Y - sum mu| exceeding the oracle and empirical widths.
struct MartingaleRates {
  std::int64_t trials = 0;
  double oracle_rate = 0.0;
  std::int64_t conditioned_trials = 0;  // trials in which A_n held
  double empirical_rate = 0.0;          // among those trials
};

// i.i.d. Geometric(p) terms when adaptive is false; otherwise each p_i is
// chosen from the previous draw (p_low after a positive draw, p_high after 0).
MartingaleRates martingale_violation_rates(std::int64_t trials, int n, double c, bool adaptive,
                                           double p, double p_low, double p_high,
                                           SimulationRng& rng);

struct CoverageRate {
  std::int64_t epoch = 0;
  std::int64_t checked = 0;  // (trial, item) pairs with positive exposure
  double violation_rate = 0.0;
  double allowed = 0.0;      // 4 / (J l)
};

// Plays uniformly random actions on `inst` for `epochs` epochs and measures how
// often |abar_j - alpha_j| exceeds sqrt(4 log(J l^2/2) / Lambda) + 4 log(J l^2/2) / Lambda.
CoverageRate known_bias_coverage(const ProblemInstance& inst, std::int64_t epochs,
                                 std::int64_t trials, SimulationRng& rng);

std::vector<CheckResult> concentration_suite(const ConcentrationOptions& options = {});

std::vector<CheckResult> theory_suite();

// Raw-moment series oracles for Geometric(p) on {0,1,...}.
double geometric_raw_moment_series(int n, double p);
double geometric_central_moment_series(int n, double p);
// Cumulants from series raw moments through the moment-cumulant recursion.
double geometric_cumulant_series(int n, double p);

// Runs "distributional", "concentration" or "theory". Throws on other names.
std::vector<CheckResult> run_suite(std::string_view name);

}  // namespace mnlrank
