#pragma once

#include <deque>
#include <vector>

#include "onc/costs.hpp"
#include "onc/stability.hpp"
#include "onc/trace.hpp"

namespace onc {

// Disturbance-action control: u_t = -K x_t + sum_{i=1..m} M_i w_{t-i}, with
// the M_i learned by projected online gradient descent on a truncated
// counterfactual loss.

struct DacParams {
  int memory = 5;        // m
  int truncation = 10;   // h
  double learning_rate = 0.0;
  double coefficient_bound = 10.0;
  StabilityCertificate anchor_gain;

  void validate() const;
};

struct DacState {
  std::vector<MatrixXd> coefficients;   // M_1..M_m, each input_dim x state_dim
  std::deque<VectorXd> disturbance_history;  // oldest first, at most m + h entries

  static DacState zero(const LtiSystem& system, const DacParams& params);
  /// w_{t-i} relative to the newest stored disturbance w_{t-1}; zero if absent.
  VectorXd past_disturbance(int i, Eigen::Index n) const;
  void push_disturbance(const VectorXd& w, const DacParams& params);
};

VectorXd dac_input(const DacState& state, const DacParams& params, const VectorXd& x);

/// w_t = x_{t+1} - A x_t - B u_t.
VectorXd recover_disturbance(const LtiSystem& system, const VectorXd& x, const VectorXd& u,
                             const VectorXd& next_x);

/// Counterfactual state after h steps of the anchor loop driven by the stored
/// disturbances and the given coefficients, started from zero:
///   y = sum_{j=0}^{h-1} Abar^j (B sum_i M_i w_{t-1-j-i} + w_{t-1-j}).
VectorXd surrogate_state(const std::vector<MatrixXd>& coefficients, const DacState& state,
                         const DacParams& params, const LtiSystem& system);

/// Gradient of cost(surrogate_state(M)) with respect to each M_i.
std::vector<MatrixXd> surrogate_gradient(const std::vector<MatrixXd>& coefficients,
                                         const DacState& state, const DacParams& params,
                                         const LtiSystem& system, const StageCost& cost);

/// One projected gradient step; every M_i is projected onto the Frobenius
/// ball of radius coefficient_bound.
DacState ogd_update(const DacState& state, const DacParams& params, const LtiSystem& system,
                    const StageCost& cost);

RunTrace run_dac(const DacParams& params, const LtiSystem& system, const CostSequence& costs,
                 const std::vector<VectorXd>& disturbances, const VectorXd& x1);

}  // namespace onc
