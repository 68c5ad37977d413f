#include "mnlrank/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mnlrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log arguments fall below 1 only for J = 1 at l = 1; clamp so widths stay real.
double clamped_log(double x) { return std::max(0.0, std::log(x)); }

double bernstein_width(double scale, double alpha_bar, double log_term, double exposure) {
  if (!(exposure > 0.0)) return kInf;
  const double shape = std::min(1.0, 2.0 * alpha_bar);
  return std::sqrt(scale * shape * log_term / exposure) + scale * log_term / exposure;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double ucb_width_known(const UcbWidthParams& p) {
  const double l = static_cast<double>(p.epoch);
  const double log_term = clamped_log(p.n_items * l * l / 2.0);
  return bernstein_width(4.0, p.alpha_bar, log_term, p.exposure);
}

double ucb_width_weak(const UcbWidthParams& p) {
  const double l = static_cast<double>(p.epoch);
  const double log_term = clamped_log(std::sqrt(static_cast<double>(p.n_items)) * l / std::sqrt(2.0));
  return bernstein_width(48.0, p.alpha_bar, log_term, p.exposure);
}

double ucb_width_em(double beta1_sq, int n_items, std::int64_t epoch, EmWidthVariant variant) {
  if (epoch < 1) throw std::invalid_argument("ucb_width_em: epoch must be >= 1");
  const double l = static_cast<double>(epoch);
  const double j = static_cast<double>(n_items);
  switch (variant) {
    case EmWidthVariant::paper:
      return std::sqrt(36.0 * beta1_sq * clamped_log(j * l * l));
    case EmWidthVariant::star:
      return 0.5 * std::sqrt(beta1_sq * clamped_log(std::sqrt(j) * l));
  }
  return kInf;
}

Beta1Result beta1_squared(const CountState& state, const EmEstimate& fitted,
                          const EmOptions& options, PerturbedStart start) {
  const int n_slots = state.n_slots();
  const int n_items = state.n_items();
  Beta1Result out;
  out.beta1_sq.assign(static_cast<std::size_t>(n_items), 0.0);

  EmData data = EmData::from_counts(state);
  std::vector<double> cold_alpha(static_cast<std::size_t>(n_items), 0.5);
  std::vector<double> cold_lambda(static_cast<std::size_t>(n_slots), 0.5);
  cold_lambda[0] = 1.0;
  const std::span<const double> init_alpha =
      start == PerturbedStart::warm ? std::span<const double>(fitted.alpha) : cold_alpha;
  const std::span<const double> init_lambda =
      start == PerturbedStart::warm ? std::span<const double>(fitted.lambda) : cold_lambda;

  EmOptions solve_options = options;
  solve_options.on_iteration = nullptr;

  for (int k = 0; k < n_slots; ++k) {
    for (int s = 0; s < n_items; ++s) {
      const auto weight = static_cast<double>(state.placements(k, s));
      if (weight < 1.0) continue;
      data.clicks(k, s) += 1.0;
      const EmEstimate perturbed = em_fit(data, init_alpha, init_lambda, solve_options);
      data.clicks(k, s) -= 1.0;
      ++out.perturbed_solves;
      if (!perturbed.converged) ++out.nonconverged_solves;
      for (int j = 0; j < n_items; ++j) {
        const double d = fitted.alpha[j] - perturbed.alpha[j];
        out.beta1_sq[j] += d * d * weight;
      }
    }
  }
  return out;
}

double mg_constant(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("mg_constant: p must lie in (0,1)");
  // At b = -log(1 - p)/2 the product (1 - p) e^b collapses to sqrt(1 - p).
  const double q = std::sqrt(1.0 - p);
  return q / (p * (1.0 - std::sqrt(q)));
}

std::uint64_t derangement(int m) {
  if (m < 0) throw std::invalid_argument("derangement: m must be non-negative");
  if (m > 20) throw std::overflow_error("derangement: !m overflows 64 bits for m > 20");
  std::uint64_t prev2 = 1;  // !0
  std::uint64_t prev1 = 0;  // !1
  if (m == 0) return prev2;
  for (int i = 2; i <= m; ++i) {
    const std::uint64_t next = static_cast<std::uint64_t>(i - 1) * (prev1 + prev2);
    prev2 = prev1;
    prev1 = next;
  }
  return prev1;
}

std::vector<std::int64_t> cumulant_coeffs(int n) {
  if (n < 2) throw std::invalid_argument("cumulant_coeffs: defined for n >= 2");
  std::vector<std::int64_t> h = {1, 1};
  for (int order = 3; order <= n; ++order) {
    std::vector<std::int64_t> next(static_cast<std::size_t>(order));
    next[0] = 1;
    for (int i = 2; i <= order - 1; ++i) {
      next[i - 1] = i * h[i - 1] + (i - 1) * h[i - 2];
    }
    next[order - 1] = (order - 1) * h[order - 2];
    h = std::move(next);
  }
  return h;
}

double geometric_cumulant(int n, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric_cumulant: p outside (0,1]");
  if (n < 1) throw std::invalid_argument("geometric_cumulant: n must be >= 1");
  if (n == 1) return (1.0 - p) / p;
  const auto h = cumulant_coeffs(n);
  double kappa = 0.0;
  double inv_pow = 1.0;
  for (int i = 1; i <= n; ++i) {
    inv_pow /= p;
    const double sign = ((n - i) % 2 == 0) ? 1.0 : -1.0;
    kappa += sign * static_cast<double>(h[i - 1]) * inv_pow;
  }
  return kappa;
}

namespace {

// Enumerates j_1..j_len >= 0 with sum j_i = parts and sum i j_i = total.
void bell_terms(int index, int len, int parts_left, int total_left, double coeff,
                std::span<const double> x, double& acc) {
  if (index > len) {
    if (parts_left == 0 && total_left == 0) acc += coeff;
    return;
  }
  const double term = x[index - 1] / factorial(index);
  double power = 1.0;
  double denom = 1.0;
  for (int j = 0; j <= parts_left && j * index <= total_left; ++j) {
    if (j > 0) {
      power *= term;
      denom *= j;
    }
    bell_terms(index + 1, len, parts_left - j, total_left - j * index, coeff * power / denom,
               x, acc);
  }
}

}  // namespace

double bell_incomplete(int n, int m, std::span<const double> x) {
  if (m < 1 || n < m) throw std::invalid_argument("bell_incomplete: needs n >= m >= 1");
  const int len = n - m + 1;
  if (static_cast<int>(x.size()) < len) {
    throw std::invalid_argument("bell_incomplete: needs n - m + 1 arguments");
  }
  double acc = 0.0;
  bell_terms(1, len, m, n, 1.0, x, acc);
  return factorial(n) * acc;
}

double central_moment_geometric(int n, double p) {
  if (n < 2) throw std::invalid_argument("central_moment_geometric: n must be >= 2");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("central_moment_geometric: p outside (0,1)");
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);  // x_1 = 0 centres the moments
  for (int i = 2; i <= n; ++i) x[i - 1] = geometric_cumulant(i, p);
  double mu = 0.0;
  for (int m = 1; m <= n; ++m) {
    mu += bell_incomplete(n, m, std::span<const double>(x).first(static_cast<std::size_t>(n - m + 1)));
  }
  return mu;
}

double central_moment_bound(int n, double p) {
  return static_cast<double>(derangement(n)) * (1.0 - p) / std::pow(p, n);
}

bool central_moment_bound_holds(int n, double p) {
  const double bound = central_moment_bound(n, p);
  return central_moment_geometric(n, p) <= bound * (1.0 + 1e-12);
}

double martingale_width_oracle(double sigma_sq_sum, double c) {
  if (!(c > 1.0)) throw std::invalid_argument("martingale width: C must exceed 1");
  const double lc = std::log(c);
  return std::sqrt(2.0 * sigma_sq_sum * lc) + 4.0 * lc;
}

double martingale_width_empirical(double y_sum, double c) {
  if (!(c > 1.0)) throw std::invalid_argument("martingale width: C must exceed 1");
  const double lc = std::log(c);
  return std::sqrt(8.0 * y_sum * lc) + 4.0 * lc;
}

}  // namespace mnlrank
