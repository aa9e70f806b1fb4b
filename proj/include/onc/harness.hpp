#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "onc/batch_ftpl.hpp"
#include "onc/dac.hpp"

namespace onc {

/// Distributions for the quadratic stage costs:
///   Q_t = D^T D + ridge I, D_ij ~ U[-entry_range, entry_range];
///   c_t ~ U[-center_range, center_range]^N.
struct CostFamily {
  double weight_entry_range = 1.0;
  double weight_ridge = 0.1;
  double center_range = 5.0;
};

struct DisturbanceSpec {
  std::string kind = "uniform";  // "zero" | "uniform"
  double range = 0.5;            // w_t ~ U[-range, range]^N
};

struct ExperimentConfig {
  std::string system_preset = "study-3x2";
  std::optional<MatrixXd> a_matrix;  // overrides the preset when both are set
  std::optional<MatrixXd> b_matrix;
  int horizon = 500;
  std::uint64_t seed = 1;
  int repetitions = 20;
  CostFamily cost_family;
  DisturbanceSpec disturbance;
  int bank_count = 100;
  double bank_target_gamma = 0.1;
  double bank_kappa_cap = 50.0;
  double ball_radius = 10.0;
  std::string algorithm = "both";  // "batchftpl" | "dac" | "both"
  // Zero means "derive": H from (gamma, kappa), eta from the regret-optimal
  // formula, epsilon = 1/T, L and D from the cost family and bank.
  int batch_size = 0;
  double eta = 0.0;
  double epsilon = 0.0;
  double lipschitz = 0.0;
  double domain_radius = 0.0;
  double epsilon_bench = 0.0;  // zero means 1e-6 * T
  std::string sign_mode = "literal";         // "literal" | "random-sign"
  std::string disturbance_mode = "auto";     // "auto" | "on" | "off"
  int dac_memory = 5;
  int dac_truncation = 10;
  double dac_learning_rate = 0.0;  // zero means 1/sqrt(T)
  double dac_coefficient_bound = 10.0;
  std::vector<double> x1;  // empty means the origin
  std::vector<int> sweep_horizons = {200, 400, 800, 1600};
  std::string output_dir = "results";

  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
/// Hash of the canonical JSON form, excluding output paths.
std::string config_hash(const ExperimentConfig& cfg);

LtiSystem make_system(const ExperimentConfig& cfg);

/// Everything a repetition needs that does not depend on the random instance.
struct Experiment {
  ExperimentConfig config;
  LtiSystem system;
  ControllerBank bank;
  InputBall ball;
  VectorXd x1;
  int batch_size = 1;
  double epsilon = 0.0;
  double domain_radius = 0.0;  // max(D_x, kappa/gamma ||B|| U)
  bool disturbance_mode = false;
};

Experiment prepare_experiment(const ExperimentConfig& cfg);
/// Reuses an existing bank instead of generating one.
Experiment prepare_experiment(const ExperimentConfig& cfg, ControllerBank bank);

struct Instance {
  CostSequence costs;
  std::vector<VectorXd> disturbances;
};

/// Deterministic per (seed, repetition). Fills L and D on the cost sequence.
Instance generate_instance(const Experiment& experiment, int repetition);

/// Hash of the exact bytes of the cost and disturbance sequences.
std::string instance_hash(const Instance& instance);

struct Benchmark {
  double value = 0.0;
  SteadyStateTarget target;
  int bank_index = 0;
};

Benchmark compute_benchmark(const std::vector<CostHandle>& stages, const LtiSystem& system,
                            const ControllerBank& bank, const InputBall& ball, double epsilon_bench);

/// x_d_{t+1} = (A - B K0) x_d_t + w_t from x_d_1 = 0; T + 1 entries.
std::vector<VectorXd> disturbance_driven_states(const LtiSystem& system, const MatrixXd& anchor,
                                                const std::vector<VectorXd>& disturbances);

struct RunResult {
  RunTrace trace;
  double cumulative = 0.0;
  double benchmark = 0.0;
  double regret = 0.0;
  int repetition = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  // Parameters actually used by the controller.
  nlohmann::json parameters;
  std::optional<BatchFtplRun> ftpl_details;
};

struct RepetitionResult {
  int repetition = 0;
  std::string instance_hash;
  double benchmark = 0.0;
  std::optional<RunResult> ftpl;
  std::optional<RunResult> dac;
  std::string error;  // non-empty when the repetition failed
};

struct ComparisonResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<RepetitionResult> repetitions;
};

BatchFtplParams ftpl_params(const Experiment& experiment, const Instance& instance, int repetition);
DacParams dac_params(const Experiment& experiment);

/// One repetition: fresh instance, the selected controllers on identical
/// costs, disturbances and x1, plus the hindsight benchmark.
RepetitionResult run_repetition(const Experiment& experiment, int repetition);

ComparisonResult run_comparison(const ExperimentConfig& cfg);
ComparisonResult run_comparison(const Experiment& experiment);

struct CurveStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  int runs = 0;
};

/// Mean and sample std of the cumulative-cost curve per step for "batchftpl"
/// or "dac", over the successful repetitions.
CurveStats cumulative_stats(const ComparisonResult& result, const std::string& algorithm);

struct SweepPoint {
  int horizon = 0;
  std::vector<double> regrets;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  double epsilon = 0.0;
  int failures = 0;
};

struct SweepResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<SweepPoint> points;
  double slope = 0.0;  // least-squares slope of log(mean regret) vs log T
};

using RepetitionObserver = std::function<void(const Experiment&, const RepetitionResult&)>;

/// Zero-disturbance regret-vs-T sweep of the learner with derived parameters.
/// The observer, if set, sees every repetition before it is reduced.
SweepResult run_sweep(const ExperimentConfig& cfg, const RepetitionObserver& observe = {});

/// Least-squares slope of log(y) against log(x); NaN if any y <= 0.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Writes traces/*.csv, summary.json and the plot files into `dir`.
void emit(const ComparisonResult& result, const std::filesystem::path& dir);
void emit(const SweepResult& result, const std::filesystem::path& dir);

/// One row per step: t, x_1..x_N, u_1..u_M, stage_cost, cumulative, batch_index.
std::string trace_csv(const RunTrace& trace);

nlohmann::json summary_json(const ComparisonResult& result);
nlohmann::json summary_json(const SweepResult& result);

}  // namespace onc
