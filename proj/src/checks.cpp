#include "mnlrank/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "mnlrank/concentration.hpp"
#include "mnlrank/environment.hpp"
#include "mnlrank/inference.hpp"

namespace mnlrank {

namespace {

double chi_square_upper_tail(double statistic, int df) {
  if (df < 1) return 1.0;
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(6);
  ss << x;
  return ss.str();
}

CheckResult make_result(std::string name, bool passed, std::string detail) {
  return CheckResult{std::move(name), passed, std::move(detail)};
}

constexpr int kHistBins = 40;

void add_to_hist(std::vector<std::int64_t>& hist, std::int64_t value) {
  ++hist[static_cast<std::size_t>(std::min<std::int64_t>(value, kHistBins - 1))];
}

}  // namespace

double chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: observed and probs must match");
  }
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  if (total <= 0.0) throw std::invalid_argument("chi_square_gof: no observations");

  // Merge from the right so the sparse tail collapses into one bin.
  std::vector<double> obs, exp;
  double acc_obs = 0.0, acc_exp = 0.0;
  for (std::size_t i = observed.size(); i-- > 0;) {
    acc_obs += static_cast<double>(observed[i]);
    acc_exp += probs[i] * total;
    if (acc_exp >= 5.0) {
      obs.push_back(acc_obs);
      exp.push_back(acc_exp);
      acc_obs = acc_exp = 0.0;
    }
  }
  if (acc_exp > 0.0 || acc_obs > 0.0) {
    if (exp.empty()) {
      obs.push_back(acc_obs);
      exp.push_back(acc_exp);
    } else {
      obs.back() += acc_obs;
      exp.back() += acc_exp;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (exp[i] <= 0.0) {
      if (obs[i] > 0.0) return 0.0;
      continue;
    }
    stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  }
  return chi_square_upper_tail(stat, static_cast<int>(obs.size()) - 1);
}

double chi_square_homogeneity(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("chi_square_homogeneity: bin counts must match");
  }
  std::vector<double> cx, cy;
  double ax = 0.0, ay = 0.0;
  for (std::size_t i = x.size(); i-- > 0;) {
    ax += static_cast<double>(x[i]);
    ay += static_cast<double>(y[i]);
    if (ax + ay >= 10.0) {
      cx.push_back(ax);
      cy.push_back(ay);
      ax = ay = 0.0;
    }
  }
  if (ax + ay > 0.0) {
    if (cx.empty()) {
      cx.push_back(ax);
      cy.push_back(ay);
    } else {
      cx.back() += ax;
      cy.back() += ay;
    }
  }
  double nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    nx += cx[i];
    ny += cy[i];
  }
  const double n = nx + ny;
  if (nx <= 0.0 || ny <= 0.0) throw std::invalid_argument("chi_square_homogeneity: empty sample");
  double stat = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    const double col = cx[i] + cy[i];
    const double ex = nx * col / n;
    const double ey = ny * col / n;
    stat += (cx[i] - ex) * (cx[i] - ex) / ex + (cy[i] - ey) * (cy[i] - ey) / ey;
  }
  return chi_square_upper_tail(stat, static_cast<int>(cx.size()) - 1);
}

std::vector<double> geometric_pmf_with_tail(double p, int max_value) {
  std::vector<double> probs(static_cast<std::size_t>(max_value) + 1);
  double mass = p;
  for (int x = 0; x < max_value; ++x) {
    probs[x] = mass;
    mass *= 1.0 - p;
  }
  probs[max_value] = std::pow(1.0 - p, max_value);
  return probs;
}

// --- Distributional suite -------------------------------------------------------

std::vector<CheckResult> distributional_suite(const DistributionalOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<CheckResult> out;
  SimulationRng rng(options.seed);
  constexpr auto unlimited = std::numeric_limits<std::int64_t>::max();

  struct Case {
    std::string label;
    ProblemInstance inst;
    Action action;
  };
  const std::vector<Case> cases = {
      {"a", make_instance({0.3, 0.28, 0.26, 0.24, 0.22, 0.2}, {1.0, 0.3, 0.2, 0.1}, 1),
       Action{{0, 1, 2, 3}}},
      {"b", make_instance({0.05, 0.1, 0.15, 0.2}, {1.0, 0.2, 0.9}, 1), Action{{3, 1, 2}}},
  };

  for (const auto& c : cases) {
    const int k_slots = c.inst.n_slots();
    for (const bool fast : {false, true}) {
      std::vector<std::vector<std::int64_t>> hist(
          static_cast<std::size_t>(k_slots), std::vector<std::int64_t>(kHistBins, 0));
      std::vector<std::int64_t> total_hist(kHistBins, 0);
      bool lengths_ok = true;
      for (std::int64_t e = 0; e < options.epochs; ++e) {
        const EpochRecord rec =
            fast ? sample_epoch_fast(c.inst, c.action, rng) : run_epoch(c.inst, c.action, unlimited, rng);
        for (int k = 0; k < k_slots; ++k) add_to_hist(hist[k], rec.slot_clicks[k]);
        add_to_hist(total_hist, rec.total_clicks());
        lengths_ok = lengths_ok && !rec.truncated && rec.length == rec.total_clicks() + 1;
      }
      const std::string sampler = fast ? "sample_epoch_fast" : "run_epoch";
      for (int k = 0; k < k_slots; ++k) {
        const double w = c.inst.lambda[k] * c.inst.alpha[c.action[k]];
        const double p = 1.0 / (1.0 + w);
        const double pv = chi_square_gof(hist[k], geometric_pmf_with_tail(p, kHistBins - 1));
        out.push_back(make_result(
            "problem " + c.label + " " + sampler + " slot " + std::to_string(k + 1) +
                " clicks ~ Geometric(1/(1+lambda*alpha))",
            pv > options.significance, "p-value " + fmt(pv)));
      }
      const double p_total = 1.0 / (1.0 + attraction_sum(c.inst, c.action));
      const double pv = chi_square_gof(total_hist, geometric_pmf_with_tail(p_total, kHistBins - 1));
      out.push_back(make_result("problem " + c.label + " " + sampler +
                                    " total clicks ~ Geometric(1/(1+S))",
                                pv > options.significance, "p-value " + fmt(pv)));
      out.push_back(make_result("problem " + c.label + " " + sampler +
                                    " epoch length = clicks + 1",
                                lengths_ok, lengths_ok ? "all epochs" : "mismatch found"));
    }
  }

  // Joint law of (slot 1, slot 2) clicks, binned to {0,1,2,3+}^2.
  {
    const auto inst = make_instance({1.0, 1.0}, {1.0, 1.0}, 1);
    const Action a{{0, 1}};
    std::vector<std::int64_t> slow(16, 0), fast(16, 0);
    auto cell = [](const EpochRecord& r) {
      const auto c1 = std::min<std::int64_t>(r.slot_clicks[0], 3);
      const auto c2 = std::min<std::int64_t>(r.slot_clicks[1], 3);
      return static_cast<std::size_t>(c1 * 4 + c2);
    };
    for (std::int64_t e = 0; e < options.epochs; ++e) {
      ++slow[cell(run_epoch(inst, a, unlimited, rng))];
      ++fast[cell(sample_epoch_fast(inst, a, rng))];
    }
    const double pv = chi_square_homogeneity(slow, fast);
    out.push_back(make_result("run_epoch and sample_epoch_fast share the joint slot-click law",
                              pv > options.significance, "p-value " + fmt(pv)));
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.push_back(make_result("distributional suite runtime < 30 s", seconds < 30.0,
                            fmt(seconds) + " s"));
  return out;
}

// --- Concentration suite --------------------------------------------------------

MartingaleRates martingale_violation_rates(std::int64_t trials, int n, double c, bool adaptive,
                                           double p, double p_low, double p_high,
                                           SimulationRng& rng) {
  const double log_c = std::log(c);
  MartingaleRates rates;
  rates.trials = trials;
  std::int64_t oracle_hits = 0, empirical_hits = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    double sum_y = 0.0, sum_mu = 0.0, sum_sigma = 0.0;
    std::int64_t prev = 0;
    for (int i = 0; i < n; ++i) {
      const double pi = !adaptive ? p : (i == 0 ? p : (prev > 0 ? p_low : p_high));
      const double mu = (1.0 - pi) / pi;
      prev = sample_geometric(pi, rng);
      sum_y += static_cast<double>(prev);
      sum_mu += mu;
      sum_sigma += mu * mu + mu;
    }
    const double dev = std::abs(sum_y - sum_mu);
    if (dev > martingale_width_oracle(sum_sigma, c)) ++oracle_hits;
    if (sum_mu >= 8.0 * log_c + std::sqrt(8.0 * sum_sigma * log_c)) {
      ++rates.conditioned_trials;
      if (dev > martingale_width_empirical(sum_y, c)) ++empirical_hits;
    }
  }
  rates.oracle_rate = static_cast<double>(oracle_hits) / static_cast<double>(trials);
  rates.empirical_rate = rates.conditioned_trials == 0
                             ? 0.0
                             : static_cast<double>(empirical_hits) /
                                   static_cast<double>(rates.conditioned_trials);
  return rates;
}

CoverageRate known_bias_coverage(const ProblemInstance& inst, std::int64_t epochs,
                                 std::int64_t trials, SimulationRng& rng) {
  const int j_items = inst.n_items();
  const int k_slots = inst.n_slots();
  const double l = static_cast<double>(epochs);
  const double log_term = std::max(0.0, std::log(j_items * l * l / 2.0));
  CoverageRate rate;
  rate.epoch = epochs;
  rate.allowed = 4.0 / (j_items * l);
  std::int64_t hits = 0;
  std::vector<int> items(static_cast<std::size_t>(j_items));
  for (std::int64_t t = 0; t < trials; ++t) {
    CountState state(k_slots, j_items);
    for (std::int64_t e = 0; e < epochs; ++e) {
      for (int j = 0; j < j_items; ++j) items[j] = j;
      shuffle(items.begin(), items.end(), rng);
      const Action a{std::vector<int>(items.begin(), items.begin() + k_slots)};
      update_counts(state, sample_epoch_fast(inst, a, rng), inst.lambda);
    }
    const auto abar = alpha_bar(state);
    for (int j = 0; j < j_items; ++j) {
      const double lam = state.exposure[j];
      if (lam <= 0.0) continue;
      ++rate.checked;
      const double width = std::sqrt(4.0 * log_term / lam) + 4.0 * log_term / lam;
      if (std::abs(abar[j] - inst.alpha[j]) > width) ++hits;
    }
  }
  rate.violation_rate =
      rate.checked == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(rate.checked);
  return rate;
}

std::vector<CheckResult> concentration_suite(const ConcentrationOptions& options) {
  std::vector<CheckResult> out;
  SimulationRng rng(options.seed);
  const double bound_oracle = 2.0 / options.c;
  const double bound_empirical = 4.0 / options.c;

  const struct {
    std::string label;
    bool adaptive;
  } schedules[] = {{"i.i.d. p=0.6", false}, {"adaptive p in {0.5, 0.6}", true}};
  for (const auto& s : schedules) {
    const auto r = martingale_violation_rates(options.trials, options.n, options.c, s.adaptive,
                                              0.6, 0.5, 0.6, rng);
    out.push_back(make_result("martingale oracle width, " + s.label + ": violation rate <= 2/C",
                              r.oracle_rate <= bound_oracle,
                              "rate " + fmt(r.oracle_rate) + " vs " + fmt(bound_oracle)));
    out.push_back(make_result(
        "martingale empirical width given A_n, " + s.label + ": violation rate <= 4/C",
        r.conditioned_trials > 0 && r.empirical_rate <= bound_empirical,
        "rate " + fmt(r.empirical_rate) + " over " + std::to_string(r.conditioned_trials) +
            " trials vs " + fmt(bound_empirical)));
  }

  const auto inst = make_instance({0.3, 0.28, 0.26, 0.24, 0.22, 0.2}, {1.0, 0.3, 0.2, 0.1}, 1);
  for (const std::int64_t l : {10, 100}) {
    const auto cov = known_bias_coverage(inst, l, options.coverage_trials, rng);
    out.push_back(make_result("known-bias estimator coverage at l=" + std::to_string(l) +
                                  ": violation rate <= 4/(J l)",
                              cov.violation_rate <= cov.allowed,
                              "rate " + fmt(cov.violation_rate) + " over " +
                                  std::to_string(cov.checked) + " vs " + fmt(cov.allowed)));
  }
  return out;
}

// --- Theory suite -----------------------------------------------------------------

double geometric_raw_moment_series(int n, double p) {
  const long double q = 1.0L - p;
  long double sum = 0.0L, weight = p;
  for (int x = 0; x < 20000; ++x) {
    const long double term = std::pow(static_cast<long double>(x), n) * weight;
    sum += term;
    if (x > 50 && term < 1e-30L * sum) break;
    weight *= q;
  }
  return static_cast<double>(sum);
}

double geometric_central_moment_series(int n, double p) {
  const long double q = 1.0L - p;
  const long double mean = q / p;
  long double sum = 0.0L, weight = p;
  for (int x = 0; x < 20000; ++x) {
    const long double term = std::pow(static_cast<long double>(x) - mean, n) * weight;
    sum += term;
    if (x > 50 && std::abs(term) < 1e-30L * std::abs(sum)) break;
    weight *= q;
  }
  return static_cast<double>(sum);
}

double geometric_cumulant_series(int n, double p) {
  std::vector<double> m(static_cast<std::size_t>(n) + 1), kappa(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) m[i] = geometric_raw_moment_series(i, p);
  for (int i = 1; i <= n; ++i) {
    double k = m[i];
    double binom = 1.0;  // C(i-1, r-1)
    for (int r = 1; r < i; ++r) {
      k -= binom * kappa[r] * m[i - r];
      binom = binom * (i - r) / r;
    }
    kappa[i] = k;
  }
  return kappa[n];
}

namespace {

double absolute_central_moment_series(int n, double p) {
  const double q = 1.0 - p;
  const double mean = q / p;
  double sum = 0.0, weight = p;
  for (int x = 0; x < 20000; ++x) {
    sum += std::pow(std::abs(x - mean), n) * weight;
    weight *= q;
    if (weight < 1e-300) break;
  }
  return sum;
}

bool close_rel(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

std::vector<CheckResult> theory_suite() {
  std::vector<CheckResult> out;
  std::vector<double> ps;
  for (int i = 0; i < 10; ++i) ps.push_back(0.5 + 0.05 * i);

  {
    bool ok = true;
    std::string worst;
    double worst_ratio = 0.0;
    for (int n = 2; n <= 8; ++n) {
      for (double p : ps) {
        ok = ok && central_moment_bound_holds(n, p);
        const double ratio = central_moment_geometric(n, p) / central_moment_bound(n, p);
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          worst = "n=" + std::to_string(n) + " p=" + fmt(p);
        }
      }
    }
    out.push_back(make_result("central moments mu_n <= !n (1-p)/p^n on n 2..8, p 0.5..0.95", ok,
                              "largest ratio " + fmt(worst_ratio) + " at " + worst));
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (double p : ps) {
      const double mu = central_moment_geometric(2, p);
      const double bound = central_moment_bound(2, p);
      worst = std::max(worst, std::abs(mu - bound) / bound);
      ok = ok && close_rel(mu, bound, 1e-12);
    }
    out.push_back(make_result("central moment bound is an equality at n = 2", ok,
                              "max relative gap " + fmt(worst)));
  }
  {
    bool ok = true;
    double worst_ratio = 0.0;
    for (int n = 2; n <= 8; ++n) {
      double fact = 1.0;
      for (int i = 2; i <= n; ++i) fact *= i;
      for (double p : ps) {
        const double bound = fact / 2.0 * ((1.0 - p) / (p * p)) * std::pow(1.0 / p, n - 2);
        const double abs_mu = absolute_central_moment_series(n, p);
        worst_ratio = std::max(worst_ratio, abs_mu / bound);
        // n = 2 is the variance itself, so allow rounding slack.
        const double slack = bound * (1.0 + 1e-12);
        ok = ok && abs_mu <= slack && central_moment_geometric(n, p) <= slack;
      }
    }
    out.push_back(make_result("Bernstein moment condition E|X-mu|^n <= n!/2 sigma^2 (1/p)^(n-2)",
                              ok, "largest ratio " + fmt(worst_ratio)));
  }
  {
    const double m = mg_constant(0.5);
    out.push_back(make_result("M constant at p = 0.5 is at most 9", m <= 9.0, "M = " + fmt(m)));
  }
  {
    bool ok = derangement(0) == 1 && derangement(1) == 0;
    for (int n = 2; n <= 20; ++n) {
      const auto lhs = static_cast<std::int64_t>(derangement(n));
      const auto rhs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(derangement(n - 1)) +
                       (n % 2 == 0 ? 1 : -1);
      ok = ok && lhs == rhs;
    }
    out.push_back(make_result("derangements satisfy !n = n !(n-1) + (-1)^n for n <= 20", ok,
                              "!8 = " + std::to_string(derangement(8))));
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
      for (double p : ps) {
        const double a = geometric_cumulant(n, p);
        const double b = geometric_cumulant_series(n, p);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        ok = ok && close_rel(a, b, 1e-8);
      }
    }
    out.push_back(make_result("cumulant polynomials match moment-series cumulants", ok,
                              "max relative error " + fmt(worst)));
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (int n = 2; n <= 8; ++n) {
      for (double p : ps) {
        const double a = central_moment_geometric(n, p);
        const double b = geometric_central_moment_series(n, p);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        ok = ok && close_rel(a, b, 1e-8);
      }
    }
    out.push_back(make_result("Bell-polynomial central moments match series central moments", ok,
                              "max relative error " + fmt(worst)));
  }
  return out;
}

std::vector<CheckResult> run_suite(std::string_view name) {
  if (name == "distributional") return distributional_suite();
  if (name == "concentration") return concentration_suite();
  if (name == "theory") return theory_suite();
  throw std::invalid_argument("unknown suite: " + std::string(name));
}

}  // namespace mnlrank
