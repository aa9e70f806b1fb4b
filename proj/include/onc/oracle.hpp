#pragma once

#include <optional>
#include <vector>

#include "onc/costs.hpp"
#include "onc/steady_state.hpp"

namespace onc {

struct OracleConfig {
  double epsilon = 1e-3;
  int max_inner_iterations = 200000;
  /// Projected-gradient mapping norm at which a slice solve stops. Must not
  /// exceed epsilon / (4 U) so each slice is within epsilon / 2 of optimal.
  double inner_tolerance = 0.0;

  /// Tolerance chosen so the per-slice gap is exactly budgeted to epsilon / 2.
  static OracleConfig for_epsilon(double epsilon, const InputBall& ball,
                                  int max_inner_iterations = 200000);
  void validate(const InputBall& ball) const;
};

struct SliceResult {
  VectorXd offset;  // v*
  VectorXd point;   // z* = S_K v*
  double value = 0.0;
  int iterations = 0;
};

struct OracleResult {
  SteadyStateTarget target;
  double value = 0.0;
  int bank_index = 0;
  int inner_iterations = 0;
};

/// v -> objective(S v) and its gradient S^T grad(S v).
double pulled_value(const StageCost& objective, const SliceMap& slice, const VectorXd& v);
VectorXd pulled_gradient(const StageCost& objective, const SliceMap& slice, const VectorXd& v);

/// The quadratic v -> form(S v) in offset coordinates.
QuadraticForm pull_back(const QuadraticForm& form, const SliceMap& slice);

/**
 * Minimizes v -> objective(S_K v) over ||v|| <= U by projected gradient.
 *
 * Quadratic objectives use step 1/l with l = 2 lambda_max(S^T W S); other
 * objectives use a backtracking estimate of l. The solve stops once the
 * gradient-mapping norm drops to cfg.inner_tolerance, which bounds the
 * suboptimality of the returned point by 2 U * inner_tolerance.
 *
 * Throws OracleAccuracyError if the tolerance is not reached within
 * cfg.max_inner_iterations, NumericalError on non-finite values.
 */
SliceResult slice_min(const StageCost& objective, const SliceMap& slice, const InputBall& ball,
                      const OracleConfig& cfg, const VectorXd* warm_start = nullptr);

SliceResult slice_min(const StageCost& objective, const LtiSystem& system,
                      const StabilityCertificate& cert, const InputBall& ball,
                      const OracleConfig& cfg);

/// Epsilon-approximate minimizer over the union of bank slices. Keeps the
/// slice maps and a per-slice warm start between calls.
class BankOracle {
 public:
  BankOracle(const LtiSystem& system, const ControllerBank& bank, InputBall ball, OracleConfig cfg);

  OracleResult minimize(const StageCost& objective);

  const std::vector<SliceMap>& slices() const { return slices_; }
  const OracleConfig& config() const { return cfg_; }
  const InputBall& ball() const { return ball_; }

 private:
  const LtiSystem& system_;
  const ControllerBank& bank_;
  InputBall ball_;
  OracleConfig cfg_;
  std::vector<SliceMap> slices_;
  std::vector<std::optional<VectorXd>> warm_;
};

OracleResult approx_min(const StageCost& objective, const LtiSystem& system,
                        const ControllerBank& bank, const InputBall& ball, const OracleConfig& cfg);

}  // namespace onc
