#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "onc/harness.hpp"

namespace onc::acceptance {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 1;
  int repetitions = 20;
  int horizon = 500;
  std::vector<int> sweep_horizons = {200, 400, 800, 1600};
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path() / "onc-acceptance";
  std::vector<int> only;  // empty runs every criterion
};

/// Oracle outputs seen by earlier checks, replayed by the bounded-Z check.
struct TargetLog {
  struct Entry {
    VectorXd point;
    double bound = 0.0;
  };
  std::vector<Entry> entries;

  void add(const LtiSystem& system, const ControllerBank& bank, const InputBall& ball,
           const std::vector<BatchRecord>& batches);
};

/// The comparison study: defaults with U = 1 and a unit perturbation rate.
ExperimentConfig comparison_config(const Options& opts);

CheckResult comparative_performance(const Options& opts, TargetLog& log);
CheckResult sublinear_regret(const Options& opts, TargetLog& log);
CheckResult strong_stability_envelope(const Options& opts);
CheckResult batch_size_contraction(const Options& opts, TargetLog& log);
CheckResult bounded_steady_states(const Options& opts, TargetLog& log);
CheckResult oracle_accuracy(const Options& opts);
CheckResult superposition(const Options& opts, TargetLog& log);
CheckResult unrolled_state(const Options& opts, TargetLog& log);
CheckResult gradient_checks(const Options& opts);
CheckResult determinism(const Options& opts);

std::vector<CheckResult> run_all(const Options& opts);

/// "[PASS] 3 strong-stability envelope: detail"
std::string format(const CheckResult& r);

}  // namespace onc::acceptance
