#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mnlrank/harness.hpp"

using namespace mnlrank;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(std::string problem, std::vector<std::string> policies,
                              std::int64_t horizon, int reps) {
  ExperimentConfig cfg;
  cfg.problem_label = problem;
  cfg.problem = preset_problem(problem, horizon);
  cfg.policies = std::move(policies);
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.base_seed = 123;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mnlrank_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(RunReplication, OracleHasZeroRegret) {
  const auto cfg = small_config("a", {"oracle"}, 500, 1);
  const auto trace = run_replication(cfg, "oracle", 0);
  ASSERT_EQ(trace.rounds(), 500u);
  for (double r : trace.per_round) EXPECT_EQ(r, 0.0);
}

TEST(RunReplication, OracleCsvHasTenZeros) {
  auto cfg = small_config("a", {"oracle"}, 10, 1);
  std::ostringstream out;
  write_regret_csv(run_experiment(cfg), out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "problem,policy,replication,round,cum_regret");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(line, "a,oracle,0," + std::to_string(rows) + ",0");
  }
  EXPECT_EQ(rows, 10);
}

TEST(RunReplication, ConstantActionClosedForm) {
  const std::int64_t horizon = 1000;
  const auto cfg = small_config("b", {"fixed:0,1,2"}, horizon, 1);
  const auto trace = run_replication(cfg, "fixed:0,1,2", 0);
  const double gap = 0.355 / 1.355 - 0.205 / 1.205;
  EXPECT_NEAR(gap, 0.09187, 1e-5);
  EXPECT_NEAR(trace.final_regret(), horizon * gap, 1e-9);
}

TEST(RunReplication, EveryPolicyFillsTheHorizon) {
  for (const auto& name : policy_names()) {
    const auto cfg = small_config("b", {name}, 777, 1);
    const auto trace = run_replication(cfg, name, 0);
    EXPECT_EQ(trace.rounds(), 777u) << name;
    for (double r : trace.per_round) EXPECT_GE(r, -1e-15) << name;
  }
}

TEST(RunReplication, RealizedRegretAveragesToPseudoRegret) {
  auto cfg = small_config("b", {"fixed:0,1,2"}, 200000, 1);
  cfg.realized_regret = true;
  const auto trace = run_replication(cfg, "fixed:0,1,2", 0);
  const double gap = 0.355 / 1.355 - 0.205 / 1.205;
  EXPECT_NEAR(trace.final_regret() / 200000.0, gap, 0.005);
}

TEST(RunReplication, EpochUcbSublinearOnProblemA) {
  auto cfg = small_config("a", {"epoch-ucb"}, 50000, 40);
  cfg.base_seed = 0;
  const auto result = run_experiment(cfg);
  const auto mean = result.mean_cumulative(0);
  EXPECT_LT(mean[49999] / mean[24999], 1.8);
}

TEST(RunExperiment, ShapesAndAggregates) {
  auto cfg = small_config("c", policy_names(), 200, 3);
  const auto result = run_experiment(cfg);
  ASSERT_EQ(result.traces.size(), 7u);
  for (std::size_t p = 0; p < 7; ++p) {
    ASSERT_EQ(result.traces[p].size(), 3u);
    EXPECT_EQ(result.final_regret(p).size(), 3u);
    const auto mean = result.mean_cumulative(p);
    for (std::size_t t = 0; t < mean.size(); t += 37) {
      const double direct = (result.traces[p][0].cumulative[t] + result.traces[p][1].cumulative[t] +
                             result.traces[p][2].cumulative[t]) / 3.0;
      EXPECT_NEAR(mean[t], direct, 1e-12);
    }
    // Mean of cumulative traces equals the running sum of mean per-round regret.
    double running = 0.0;
    for (std::size_t t = 0; t < mean.size(); ++t) {
      running += (result.traces[p][0].per_round[t] + result.traces[p][1].per_round[t] +
                  result.traces[p][2].per_round[t]) / 3.0;
    }
    EXPECT_NEAR(mean.back(), running, 1e-9);
  }
  EXPECT_EQ(result.policy_index("toprank"), 5u);
  EXPECT_THROW(result.policy_index("nope"), std::out_of_range);
}

TEST(RunExperiment, SameSeedByteIdenticalCsv) {
  auto cfg = small_config("a", {"epoch-ucb", "toprank", "epoch-ucb-star-upb"}, 1500, 2);
  cfg.output_dir = fresh_dir("det1");
  run_experiment(cfg);
  const auto first = slurp(cfg.output_dir / "regret.csv");
  const auto first_summary = slurp(cfg.output_dir / "summary.csv");
  cfg.output_dir = fresh_dir("det2");
  cfg.threads = 3;
  run_experiment(cfg);
  EXPECT_EQ(first, slurp(cfg.output_dir / "regret.csv"));
  EXPECT_EQ(first_summary, slurp(cfg.output_dir / "summary.csv"));
  EXPECT_FALSE(first.empty());

  cfg.base_seed = 124;
  cfg.output_dir = fresh_dir("det3");
  run_experiment(cfg);
  EXPECT_NE(first, slurp(cfg.output_dir / "regret.csv"));
}

TEST(Csv, RoundTripsExactly) {
  auto cfg = small_config("b", {"epoch-ucb", "pbucb"}, 300, 2);
  const auto result = run_experiment(cfg);
  std::stringstream buf;
  write_regret_csv(result, buf);
  const auto parsed = read_regret_csv(buf);
  EXPECT_TRUE(same_cumulative(result, parsed));
  EXPECT_EQ(parsed.problem_label, "b");
}

TEST(Csv, SummaryHasOneRowPerReplication) {
  auto cfg = small_config("a", {"epoch-ucb", "oracle"}, 100, 4);
  const auto result = run_experiment(cfg);
  std::ostringstream out;
  write_summary_csv(result, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "problem,policy,replication,final_regret");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 8);
}

TEST(Csv, RecordEveryKeepsLastRound) {
  auto cfg = small_config("a", {"oracle"}, 25, 1);
  const auto result = run_experiment(cfg);
  std::ostringstream out;
  write_regret_csv(result, out, 10);
  EXPECT_EQ(out.str(),
            "problem,policy,replication,round,cum_regret\n"
            "a,oracle,0,10,0\na,oracle,0,20,0\na,oracle,0,25,0\n");
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream bad_header("x,y\n");
  EXPECT_THROW(read_regret_csv(bad_header), std::runtime_error);
  std::istringstream bad_row("problem,policy,replication,round,cum_regret\na,b,0,1\n");
  EXPECT_THROW(read_regret_csv(bad_row), std::runtime_error);
  std::istringstream bad_number("problem,policy,replication,round,cum_regret\na,b,0,1,zz\n");
  EXPECT_THROW(read_regret_csv(bad_number), std::runtime_error);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double x : {0.0, 0.1, 1.0 / 3.0, 12345.678901234567, 1e-300}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(WriteResults, FailureLeavesNoFiles) {
  auto cfg = small_config("a", {"oracle"}, 10, 1);
  const auto result = run_experiment(cfg);
  const auto dir = fresh_dir("blocked");
  fs::create_directories(dir);
  const auto file = dir / "not_a_dir";
  std::ofstream(file) << "x";
  EXPECT_THROW(write_results(result, file / "sub"), std::runtime_error);
  EXPECT_FALSE(fs::exists(file / "sub" / "regret.csv"));
}

TEST(Config, ValidationErrors) {
  auto cfg = small_config("a", {"epoch-ucb"}, 10, 1);
  EXPECT_NO_THROW(cfg.validate());
  cfg.replications = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.replications = 1;
  cfg.policies = {"greedy"};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.policies = {};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.policies = {"fixed:0,0,1,2"};
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  auto cfg = small_config("b", {"epoch-ucb", "toprank"}, 400, 3);
  cfg.threads = 2;
  cfg.policy.toprank_c = 3.0;
  const auto back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(back.problem_label, "b");
  EXPECT_EQ(back.problem.alpha, cfg.problem.alpha);
  EXPECT_EQ(back.policies, cfg.policies);
  EXPECT_EQ(back.horizon, 400);
  EXPECT_EQ(back.replications, 3);
  EXPECT_EQ(back.base_seed, 123u);
  EXPECT_EQ(back.threads, 2);
  EXPECT_DOUBLE_EQ(back.policy.toprank_c, 3.0);

  const auto custom = config_from_json(nlohmann::json::parse(R"({
    "problem": {"label": "tiny", "alpha": [0.5, 0.4, 0.3], "lambda": [1.0, 0.5]},
    "policies": ["epoch-ucb"], "horizon": 50, "replications": 2, "base_seed": 9
  })"));
  EXPECT_EQ(custom.problem_label, "tiny");
  EXPECT_EQ(custom.problem.n_items(), 3);
  EXPECT_EQ(run_experiment(custom).traces[0].size(), 2u);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"problem": "a"})")),
               nlohmann::json::exception);
}

TEST(UpperBound, DegenerateAndReevaluated) {
  const auto one = make_instance({1.0}, {1.0}, 1);
  const double v = regret_upper_bound_value(one, 1);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 0.0);

  const auto a = preset_problem("a", 50000);
  const double t = 50000.0;
  const double leading = std::sqrt(48.0 * std::log(6.0 * t * t) * 6.0 * 4.0 * t / 0.1);
  EXPECT_NEAR(leading, 116174.17, 0.01);
  const double log_terms =
      (9.0 * 5.0 + 14.0 * 6.0 / (0.1 * 4.0) * std::log(6.0 * t * t / 2.0)) * (std::log(t) + 1.0);
  EXPECT_NEAR(regret_upper_bound_value(a, 50000), leading + log_terms, 1e-6);
  EXPECT_NEAR(regret_upper_bound_value(a, 50000), 173145.69, 0.01);
}

TEST(UpperBound, DominatesObservedEpochUcbRegret) {
  auto cfg = small_config("a", {"epoch-ucb"}, 20000, 10);
  const auto mean = run_experiment(cfg).mean_cumulative(0);
  const auto inst = preset_problem("a", 20000);
  for (std::size_t t = 0; t < mean.size(); ++t) {
    ASSERT_LE(mean[t], regret_upper_bound_value(inst, static_cast<std::int64_t>(t) + 1));
  }
}
