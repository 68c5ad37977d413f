#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mnlrank/inference.hpp"

namespace mnlrank {

// Inputs of the known-bias confidence widths for one item at epoch l.
struct UcbWidthParams {
  int n_items = 1;
  std::int64_t epoch = 1;  // l >= 1
  double exposure = 0.0;   // Lambda_j
  double alpha_bar = 0.0;
};

// sqrt(4 min(1, 2 abar) log(J l^2 / 2) / Lambda) + 4 log(J l^2 / 2) / Lambda.
// Returns +infinity when the item has no exposure yet.
double ucb_width_known(const UcbWidthParams& p);

// The same shape with the constant 48 and log(sqrt(J) l / sqrt(2)).
double ucb_width_weak(const UcbWidthParams& p);

enum class EmWidthVariant { paper, star };

// paper: sqrt(36 beta1^2 log(J l^2)); star: 0.5 sqrt(beta1^2 log(sqrt(J) l)).
double ucb_width_em(double beta1_sq, int n_items, std::int64_t epoch, EmWidthVariant variant);

enum class PerturbedStart { warm, cold };

struct Beta1Result {
  std::vector<double> beta1_sq;  // one entry per item
  int perturbed_solves = 0;
  int nonconverged_solves = 0;
};

// Data-dependent smoothness bound of the EM attractiveness estimator:
//   beta1_j^2 = sum_{k,s: Ntilde_ks >= 1} (alpha_j(N) - alpha_j(N + e_ks))^2 Ntilde_ks.
// `fitted` is the EM solution on the unperturbed counts. Perturbed solves start
// from it (warm) or from the default initial point (cold).
Beta1Result beta1_squared(const CountState& state, const EmEstimate& fitted,
                          const EmOptions& options = {},
                          PerturbedStart start = PerturbedStart::warm);

// M = M_G(-log(1 - p) / 2) for the log-Sobolev constant
// M_G(b) = (1 - p) e^b / (p (1 - sqrt((1 - p) e^b))). Requires p in (0,1).
double mg_constant(double p);

// Number of derangements !m via !m = (m - 1)(!(m - 1) + !(m - 2)). Exact for m <= 20.
std::uint64_t derangement(int m);

// Coefficients h_{n,1..n} of the n-th Geometric cumulant,
// kappa_n(p) = sum_i (-1)^(n-i) h_{n,i} / p^i. Requires n >= 2.
std::vector<std::int64_t> cumulant_coeffs(int n);

// kappa_n of Geometric(p) on {0,1,...}; n = 1 gives the mean (1 - p) / p.
double geometric_cumulant(int n, double p);

// Incomplete exponential Bell polynomial B_{n,m}(x_1, ..., x_{n-m+1}).
double bell_incomplete(int n, int m, std::span<const double> x);

// n-th central moment of Geometric(p) assembled from cumulants:
// mu_n = sum_m B_{n,m}(0, kappa_2, ..., kappa_{n-m+1}).
double central_moment_geometric(int n, double p);

// !n (1 - p) / p^n.
double central_moment_bound(int n, double p);

// mu_n <= !n (1 - p) / p^n, allowing 1e-12 relative slack for the n = 2 equality.
bool central_moment_bound_holds(int n, double p);

// Deviation widths for sums of Geometric variables with means <= 1.
// oracle:    sqrt(2 sum sigma_i^2 log C) + 4 log C
// empirical: sqrt(8 sum Y_i log C) + 4 log C
double martingale_width_oracle(double sigma_sq_sum, double c);
double martingale_width_empirical(double y_sum, double c);

}  // namespace mnlrank
