#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "onc/costs.hpp"
#include "onc/oracle.hpp"
#include "onc/trace.hpp"

namespace onc {

/// Smallest H >= 1 with kappa (1 - gamma)^H <= 1/2, i.e.
/// ceil(ln(2 kappa) / -ln(1 - gamma)).
int derive_batch_size(double gamma, double kappa);

/// Learning rate of the perturbation: 1 / (5 L sqrt(2 N T c)) with
/// c = 1 - ln(2 kappa) / ln(1 - gamma) + 8 kappa^3 / gamma^2.
double derive_eta(double lipschitz, int state_dim, int horizon, double gamma, double kappa);

/// Bound on ||x_t|| for w = 0 when every batch policy is drawn from a bank
/// with uniform (gamma, kappa) and H satisfies kappa (1 - gamma)^H <= 1/2:
///   R + kappa * max(||x1|| + R, 4 R),   R = kappa / gamma ||B|| U.
/// Each batch halves the tracking error and a target switch adds at most 2R.
double bounded_state_envelope(const LtiSystem& system, double gamma, double kappa,
                              const InputBall& ball, const VectorXd& x1);

struct BatchFtplParams {
  int horizon = 0;
  int batch_size = 1;
  double eta = 1.0;
  double epsilon = 1e-3;
  std::uint64_t rng_seed = 0;
  SignMode sign_mode = SignMode::kLiteral;
  /// Run on the nominal/disturbance split with a fixed anchor gain K0.
  bool disturbance_mode = false;
  std::optional<StabilityCertificate> anchor_gain;
  /// Test hook: use this sigma instead of sampling one.
  std::optional<VectorXd> sigma_override;
  int max_inner_iterations = 200000;

  void validate() const;
};

struct BatchRecord {
  int batch = 0;
  int first_step = 0;
  SteadyStateTarget target;
  int bank_index = 0;
  double oracle_value = 0.0;
  double oracle_seconds = 0.0;
  int inner_iterations = 0;
};

/**
 * Online controller: every H steps re-target to an approximate minimizer of
 * the perturbed cumulative cost over the bank-discretized steady-state
 * manifold, and hold the realizing affine policy for the batch.
 *
 * Protocol per step t = 1..T: control_input(x_t), apply, then
 * observe(f_t, x_{t+1}, w_t). In disturbance mode the controller keeps the
 * split x = x_nom + x_d, drives x_nom with the learned policy and x_d with
 * the anchor gain, and learns on the translated costs f_t(. + x_d_t).
 */
class BatchFtpl {
 public:
  BatchFtpl(BatchFtplParams params, const LtiSystem& system, const ControllerBank& bank,
            InputBall ball, const VectorXd& x1);

  VectorXd control_input(const VectorXd& x) const;

  /// Records f_t, advances the internal state and re-targets at batch
  /// boundaries. Returns the ledger cost: f_t(x_t), or g_t(x_nom_t) in
  /// disturbance mode.
  double observe(const CostHandle& cost, const VectorXd& next_x, const VectorXd& w);

  int time() const { return t_; }
  int batch_index() const { return batch_; }
  bool finished() const { return finished_; }
  const AffinePolicy& policy() const { return batches_.back().target.policy; }
  const SteadyStateTarget& target() const { return batches_.back().target; }
  const std::vector<BatchRecord>& batches() const { return batches_; }
  const PerturbationTerm& perturbation() const { return perturbation_; }
  const SplitState& split() const { return split_; }
  const BatchFtplParams& params() const { return params_; }

 private:
  void retarget();
  VectorXd anchor_input(const VectorXd& xd) const;

  BatchFtplParams params_;
  const LtiSystem& system_;
  InputBall ball_;
  BankOracle oracle_;
  PerturbationTerm perturbation_;
  // Sufficient statistics of f0 + observed costs while all are quadratic.
  std::optional<QuadraticForm> accumulated_form_;
  std::vector<CostHandle> accumulated_terms_;
  std::vector<BatchRecord> batches_;
  VectorXd x_;
  SplitState split_;
  int t_ = 1;
  int batch_ = 1;
  bool finished_ = false;
};

struct BatchFtplRun {
  RunTrace trace;
  std::vector<BatchRecord> batches;
  std::vector<VectorXd> nominal;             // x_nom_t, t = 1..T+1 (disturbance mode)
  std::vector<VectorXd> disturbance_driven;  // x_d_t,  t = 1..T+1 (disturbance mode)
  VectorXd sigma;
};

BatchFtplRun run_batch_ftpl(const BatchFtplParams& params, const LtiSystem& system,
                            const ControllerBank& bank, const InputBall& ball,
                            const CostSequence& costs, const std::vector<VectorXd>& disturbances,
                            const VectorXd& x1);

}  // namespace onc
