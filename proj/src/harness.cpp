#include "mnlrank/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mnlrank {

using nlohmann::json;

ProblemInstance preset_problem(std::string_view name, std::int64_t horizon) {
  if (name == "a") {
    return make_instance({0.3, 0.28, 0.26, 0.24, 0.22, 0.2}, {1.0, 0.3, 0.2, 0.1}, horizon);
  }
  if (name == "b") {
    return make_instance({0.05, 0.1, 0.15, 0.2}, {1.0, 0.2, 0.9}, horizon);
  }
  if (name == "c") {
    std::vector<double> alpha = {1.0, 1.0, 1.0, 1.0, 0.8, 0.8};
    alpha.resize(30, 0.1);
    return make_instance(std::move(alpha), {1.0, 0.9, 0.7, 0.3, 0.5, 0.7}, horizon);
  }
  throw std::invalid_argument("unknown problem preset: " + std::string(name));
}

bool is_preset(std::string_view name) { return name == "a" || name == "b" || name == "c"; }

ProblemInstance problem_from_json(const json& doc, std::int64_t horizon) {
  if (!doc.contains("alpha") || !doc.contains("lambda")) {
    throw std::invalid_argument("problem JSON needs \"alpha\" and \"lambda\" arrays");
  }
  return make_instance(doc.at("alpha").get<std::vector<double>>(),
                       doc.at("lambda").get<std::vector<double>>(),
                       doc.value("horizon", horizon));
}

void ExperimentConfig::validate() const {
  problem.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (policies.empty()) throw std::invalid_argument("no policies selected");
  for (const auto& p : policies) {
    const auto& names = policy_names();
    if (p == "oracle" || p.starts_with("fixed:")) continue;
    if (std::find(names.begin(), names.end(), p) == names.end()) {
      throw std::invalid_argument("unknown policy: " + p);
    }
  }
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  cfg.horizon = doc.at("horizon").get<std::int64_t>();
  const json& problem = doc.at("problem");
  if (problem.is_string()) {
    cfg.problem_label = problem.get<std::string>();
    cfg.problem = preset_problem(cfg.problem_label, cfg.horizon);
  } else {
    cfg.problem_label = problem.value("label", std::string("custom"));
    cfg.problem = problem_from_json(problem, cfg.horizon);
    cfg.problem.horizon = cfg.horizon;
  }
  cfg.policies = doc.value("policies", policy_names());
  cfg.replications = doc.value("replications", 1);
  cfg.base_seed = doc.value("base_seed", std::uint64_t{0});
  cfg.output_dir = doc.value("output", std::string());
  cfg.threads = doc.value("threads", 1);
  cfg.realized_regret = doc.value("realized_regret", false);
  cfg.record_every = doc.value("record_every", std::int64_t{1});
  if (doc.contains("em")) {
    const json& em = doc.at("em");
    cfg.policy.em.tolerance = em.value("tolerance", cfg.policy.em.tolerance);
    cfg.policy.em.max_iter = em.value("max_iter", cfg.policy.em.max_iter);
    cfg.policy.em.floor = em.value("floor", cfg.policy.em.floor);
  }
  if (doc.contains("toprank")) {
    const json& tr = doc.at("toprank");
    cfg.policy.toprank_c = tr.value("c", cfg.policy.toprank_c);
    cfg.policy.toprank_delta = tr.value("delta", cfg.policy.toprank_delta);
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json problem;
  if (is_preset(cfg.problem_label)) {
    problem = cfg.problem_label;
  } else {
    problem = {{"label", cfg.problem_label},
               {"alpha", cfg.problem.alpha},
               {"lambda", cfg.problem.lambda}};
  }
  return {{"problem", problem},
          {"policies", cfg.policies},
          {"horizon", cfg.horizon},
          {"replications", cfg.replications},
          {"base_seed", cfg.base_seed},
          {"output", cfg.output_dir.string()},
          {"threads", cfg.threads},
          {"realized_regret", cfg.realized_regret},
          {"record_every", cfg.record_every},
          {"em",
           {{"tolerance", cfg.policy.em.tolerance},
            {"max_iter", cfg.policy.em.max_iter},
            {"floor", cfg.policy.em.floor}}},
          {"toprank", {{"c", cfg.policy.toprank_c}, {"delta", cfg.policy.toprank_delta}}}};
}

std::vector<double> ExperimentResult::mean_cumulative(std::size_t policy) const {
  const auto& reps = traces.at(policy);
  std::vector<double> mean;
  if (reps.empty()) return mean;
  mean.assign(reps.front().rounds(), 0.0);
  for (const auto& trace : reps) {
    for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += trace.cumulative[t];
  }
  for (double& m : mean) m /= static_cast<double>(reps.size());
  return mean;
}

std::vector<double> ExperimentResult::final_regret(std::size_t policy) const {
  std::vector<double> out;
  for (const auto& trace : traces.at(policy)) out.push_back(trace.final_regret());
  return out;
}

std::size_t ExperimentResult::policy_index(std::string_view name) const {
  const auto it = std::find(policies.begin(), policies.end(), name);
  if (it == policies.end()) throw std::out_of_range("policy not in result: " + std::string(name));
  return static_cast<std::size_t>(it - policies.begin());
}

bool same_cumulative(const ExperimentResult& x, const ExperimentResult& y) {
  if (x.problem_label != y.problem_label || x.policies != y.policies ||
      x.traces.size() != y.traces.size()) {
    return false;
  }
  for (std::size_t p = 0; p < x.traces.size(); ++p) {
    if (x.traces[p].size() != y.traces[p].size()) return false;
    for (std::size_t r = 0; r < x.traces[p].size(); ++r) {
      if (x.traces[p][r].cumulative != y.traces[p][r].cumulative) return false;
    }
  }
  return true;
}

std::unique_ptr<Policy> make_experiment_policy(const ExperimentConfig& config,
                                               std::string_view policy, SimulationRng rng) {
  const ProblemInstance& inst = config.problem;
  if (policy == "oracle") {
    return std::make_unique<FixedActionPolicy>(optimal_action(inst.alpha, inst.lambda), "oracle");
  }
  if (policy.starts_with("fixed:")) {
    Action a;
    std::istringstream items(std::string(policy.substr(6)));
    for (std::string id; std::getline(items, id, ',');) a.slots.push_back(std::stoi(id));
    require_valid_action(inst, a);
    return std::make_unique<FixedActionPolicy>(std::move(a), std::string(policy));
  }
  PolicyContext ctx{inst.n_items(), inst.n_slots(), config.horizon, {}};
  if (policy_uses_known_bias(policy)) ctx.known_bias = inst.lambda;
  return make_policy(policy, ctx, rng, config.policy);
}

RegretTrace run_replication(const ExperimentConfig& config, std::string_view policy,
                            int replication) {
  ProblemInstance inst = config.problem;
  inst.horizon = config.horizon;
  const std::int64_t horizon = config.horizon;

  SimulationRng env_rng(config.base_seed + static_cast<std::uint64_t>(replication));
  SimulationRng policy_rng = env_rng.split();
  auto agent = make_experiment_policy(config, policy, policy_rng);

  const double best = expected_reward(inst, optimal_action(inst.alpha, inst.lambda));
  RegretTrace trace;
  trace.per_round.reserve(static_cast<std::size_t>(horizon));
  trace.cumulative.reserve(static_cast<std::size_t>(horizon));

  if (auto* epoch_policy = dynamic_cast<EpochPolicy*>(agent.get())) {
    std::int64_t t = 0;
    std::int64_t epoch = 0;
    while (t < horizon) {
      const Action a = epoch_policy->begin_epoch(++epoch);
      const EpochRecord rec = run_epoch(inst, a, horizon - t, env_rng);
      const double reward = expected_reward(inst, a);
      if (config.realized_regret) {
        // Every click round precedes the single closing no-click round.
        const std::int64_t clicks = rec.total_clicks();
        for (std::int64_t i = 0; i < clicks; ++i) trace.push(best - 1.0);
        for (std::int64_t i = clicks; i < rec.length; ++i) trace.push(best);
      } else {
        for (std::int64_t i = 0; i < rec.length; ++i) trace.push(best - reward);
      }
      epoch_policy->observe(rec);
      t += rec.length;
    }
  } else {
    auto& round_policy = dynamic_cast<RoundPolicy&>(*agent);
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const Action a = round_policy.select(t);
      const ClickOutcome q = sample_click(inst, a, env_rng);
      if (config.realized_regret) {
        trace.push(best - (q.is_click() ? 1.0 : 0.0));
      } else {
        trace.push(best - expected_reward(inst, a));
      }
      round_policy.observe(a, q);
    }
  }
  return trace;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.problem_label = config.problem_label;
  result.policies = config.policies;
  const std::size_t n_policies = config.policies.size();
  const auto n_reps = static_cast<std::size_t>(config.replications);
  result.traces.assign(n_policies, std::vector<RegretTrace>(n_reps));

  const std::size_t jobs = n_policies * n_reps;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t p = job / n_reps;
      const std::size_t r = job % n_reps;
      try {
        result.traces[p][r] = run_replication(config, config.policies[p], static_cast<int>(r));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(config.threads, static_cast<int>(jobs)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  if (!config.output_dir.empty()) write_results(result, config.output_dir, config.record_every);
  return result;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_regret_csv(const ExperimentResult& result, std::ostream& out,
                      std::int64_t record_every) {
  out << "problem,policy,replication,round,cum_regret\n";
  for (std::size_t p = 0; p < result.policies.size(); ++p) {
    for (std::size_t r = 0; r < result.traces[p].size(); ++r) {
      const auto& cum = result.traces[p][r].cumulative;
      const auto rounds = static_cast<std::int64_t>(cum.size());
      for (std::int64_t t = 1; t <= rounds; ++t) {
        if (t % record_every != 0 && t != rounds) continue;
        out << result.problem_label << ',' << result.policies[p] << ',' << r << ',' << t << ','
            << format_double(cum[static_cast<std::size_t>(t - 1)]) << '\n';
      }
    }
  }
}

void write_summary_csv(const ExperimentResult& result, std::ostream& out) {
  out << "problem,policy,replication,final_regret\n";
  for (std::size_t p = 0; p < result.policies.size(); ++p) {
    for (std::size_t r = 0; r < result.traces[p].size(); ++r) {
      out << result.problem_label << ',' << result.policies[p] << ',' << r << ','
          << format_double(result.traces[p][r].final_regret()) << '\n';
    }
  }
}

namespace {

void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& body) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

void write_results(const ExperimentResult& result, const std::filesystem::path& dir,
                   std::int64_t record_every) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  // Render both files in memory first so an error cannot leave one of them behind.
  std::ostringstream regret, summary;
  write_regret_csv(result, regret, record_every);
  write_summary_csv(result, summary);
  write_file_atomically(dir / "regret.csv", [&](std::ostream& out) { out << regret.str(); });
  write_file_atomically(dir / "summary.csv", [&](std::ostream& out) { out << summary.str(); });
}

ExperimentResult read_regret_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "problem,policy,replication,round,cum_regret") {
    throw std::runtime_error("regret CSV: missing or unexpected header");
  }
  ExperimentResult result;
  std::map<std::string, std::size_t> policy_slot;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw std::runtime_error("regret CSV line " + std::to_string(line_no) + ": expected 5 fields");
    }
    if (result.problem_label.empty()) result.problem_label = f[0];
    auto [it, inserted] = policy_slot.try_emplace(f[1], result.policies.size());
    if (inserted) {
      result.policies.push_back(f[1]);
      result.traces.emplace_back();
    }
    auto& reps = result.traces[it->second];
    const auto rep = static_cast<std::size_t>(std::stoul(f[2]));
    if (reps.size() <= rep) reps.resize(rep + 1);
    double value = 0.0;
    const auto res = std::from_chars(f[4].data(), f[4].data() + f[4].size(), value);
    if (res.ec != std::errc()) {
      throw std::runtime_error("regret CSV line " + std::to_string(line_no) + ": bad number");
    }
    auto& trace = reps[rep];
    const double prev = trace.cumulative.empty() ? 0.0 : trace.cumulative.back();
    trace.per_round.push_back(value - prev);
    trace.cumulative.push_back(value);
  }
  return result;
}

ExperimentResult read_regret_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_regret_csv(in);
}

double regret_upper_bound_value(const ProblemInstance& inst, std::int64_t horizon) {
  const double j = inst.n_items();
  const double k = inst.n_slots();
  const double t = static_cast<double>(horizon);
  const double lambda_min = *std::min_element(inst.lambda.begin(), inst.lambda.end());
  const double log_part = (9.0 * (k + 1.0) + 14.0 * j / (lambda_min * k) * std::log(j * t * t / 2.0)) *
                          (std::log(t) + 1.0);
  return log_part + std::sqrt(48.0 * std::log(j * t * t) * j * k * t / lambda_min);
}

}  // namespace mnlrank
