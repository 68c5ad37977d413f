#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mnlrank/model.hpp"
#include "mnlrank/policies.hpp"

namespace mnlrank {

// Named problem instances "a", "b" and "c" with the given horizon.
ProblemInstance preset_problem(std::string_view name, std::int64_t horizon);
bool is_preset(std::string_view name);

// Problem instance from JSON: {"alpha": [...], "lambda": [...]} (horizon optional).
ProblemInstance problem_from_json(const nlohmann::json& doc, std::int64_t horizon);

struct ExperimentConfig {
  std::string problem_label = "a";
  ProblemInstance problem;
  std::vector<std::string> policies;
  std::int64_t horizon = 1;
  int replications = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir;  // empty: do not persist
  int threads = 1;
  bool realized_regret = false;      // r(a*) - R(a_t) instead of r(a*) - r(a_t)
  std::int64_t record_every = 1;     // CSV keeps rounds divisible by this, plus T
  PolicyConfig policy;

  void validate() const;
};

// Reads the JSON form documented in docs/config.md.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ExperimentResult {
  std::string problem_label;
  std::vector<std::string> policies;
  std::vector<std::vector<RegretTrace>> traces;  // [policy][replication]

  std::vector<double> mean_cumulative(std::size_t policy) const;
  std::vector<double> final_regret(std::size_t policy) const;
  std::size_t policy_index(std::string_view name) const;
};

// Traces compare by cumulative regret only; that is all the CSV stores.
bool same_cumulative(const ExperimentResult& x, const ExperimentResult& y);

// Builds the named policy for this config. Besides the seven registered names
// this accepts "oracle", which always plays the true optimal action, and
// "fixed:i,j,..." which always plays the listed 0-based item ids.
std::unique_ptr<Policy> make_experiment_policy(const ExperimentConfig& config,
                                               std::string_view policy, SimulationRng rng);

// One policy for T rounds with seed base_seed + replication.
RegretTrace run_replication(const ExperimentConfig& config, std::string_view policy,
                            int replication);

// All (policy, replication) pairs, on `threads` workers, merged in index order.
// Writes regret.csv and summary.csv into output_dir when it is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Long format: problem,policy,replication,round,cum_regret
void write_regret_csv(const ExperimentResult& result, std::ostream& out,
                      std::int64_t record_every = 1);
// problem,policy,replication,final_regret
void write_summary_csv(const ExperimentResult& result, std::ostream& out);

// Writes both files through temporaries so a failure leaves no partial output.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir,
                   std::int64_t record_every = 1);

ExperimentResult read_regret_csv(std::istream& in);
ExperimentResult read_regret_csv(const std::filesystem::path& path);

// Known-bias Epoch-UCB regret bound evaluated in full:
// (9(K+1) + 14 J log(J T^2 / 2) / (lambda_min K)) (log T + 1)
//   + sqrt(48 log(J T^2) J K T / lambda_min).
double regret_upper_bound_value(const ProblemInstance& inst, std::int64_t horizon);

// Shortest round-trip decimal form used for every number in the CSV files.
std::string format_double(double value);

}  // namespace mnlrank
