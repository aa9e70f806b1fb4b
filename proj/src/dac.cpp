#include "onc/dac.hpp"

#include <chrono>
#include <cmath>

#include "onc/errors.hpp"

namespace onc {

void DacParams::validate() const {
  if (memory < 1) throw ConfigurationError("DAC: memory must be >= 1");
  if (truncation < memory) throw ConfigurationError("DAC: truncation must be >= memory");
  if (!(learning_rate >= 0.0)) throw ConfigurationError("DAC: learning rate must be >= 0");
  if (!(coefficient_bound > 0.0)) throw ConfigurationError("DAC: coefficient bound must be positive");
  if (anchor_gain.gain.size() == 0) throw ConfigurationError("DAC: missing anchor gain");
}

DacState DacState::zero(const LtiSystem& system, const DacParams& params) {
  DacState s;
  s.coefficients.assign(params.memory, MatrixXd::Zero(system.input_dim(), system.state_dim()));
  return s;
}

VectorXd DacState::past_disturbance(int i, Eigen::Index n) const {
  const auto size = static_cast<int>(disturbance_history.size());
  if (i < 1 || i > size) return VectorXd::Zero(n);
  return disturbance_history[size - i];
}

void DacState::push_disturbance(const VectorXd& w, const DacParams& params) {
  disturbance_history.push_back(w);
  while (static_cast<int>(disturbance_history.size()) > params.memory + params.truncation) {
    disturbance_history.pop_front();
  }
}

VectorXd dac_input(const DacState& state, const DacParams& params, const VectorXd& x) {
  VectorXd u = -params.anchor_gain.gain * x;
  for (int i = 1; i <= static_cast<int>(state.coefficients.size()); ++i) {
    u += state.coefficients[i - 1] * state.past_disturbance(i, x.size());
  }
  return u;
}

VectorXd recover_disturbance(const LtiSystem& system, const VectorXd& x, const VectorXd& u,
                             const VectorXd& next_x) {
  return next_x - system.a() * x - system.b() * u;
}

namespace {

// Abar^j B for j = 0..h-1.
std::vector<MatrixXd> propagated_inputs(const DacParams& params, const LtiSystem& system) {
  const MatrixXd closed = system.closed_loop(params.anchor_gain.gain);
  std::vector<MatrixXd> out;
  out.reserve(params.truncation);
  MatrixXd block = system.b();
  for (int j = 0; j < params.truncation; ++j) {
    out.push_back(block);
    block = closed * block;
  }
  return out;
}

}  // namespace

VectorXd surrogate_state(const std::vector<MatrixXd>& coefficients, const DacState& state,
                         const DacParams& params, const LtiSystem& system) {
  const auto n = system.state_dim();
  const MatrixXd closed = system.closed_loop(params.anchor_gain.gain);
  // Forward recursion from y = 0 at time t - h.
  VectorXd y = VectorXd::Zero(n);
  for (int j = params.truncation - 1; j >= 0; --j) {
    // Step s = t-1-j uses w_s (offset j+1) and w_{s-i} (offset j+1+i).
    VectorXd u = VectorXd::Zero(system.input_dim());
    for (int i = 1; i <= static_cast<int>(coefficients.size()); ++i) {
      u += coefficients[i - 1] * state.past_disturbance(j + 1 + i, n);
    }
    y = closed * y + system.b() * u + state.past_disturbance(j + 1, n);
  }
  return y;
}

std::vector<MatrixXd> surrogate_gradient(const std::vector<MatrixXd>& coefficients,
                                         const DacState& state, const DacParams& params,
                                         const LtiSystem& system, const StageCost& cost) {
  const auto n = system.state_dim();
  const VectorXd y = surrogate_state(coefficients, state, params, system);
  const VectorXd g = cost.gradient(y);
  const auto blocks = propagated_inputs(params, system);
  std::vector<MatrixXd> grads(coefficients.size(),
                              MatrixXd::Zero(system.input_dim(), system.state_dim()));
  for (int j = 0; j < params.truncation; ++j) {
    const VectorXd pulled = blocks[j].transpose() * g;
    for (int i = 1; i <= static_cast<int>(coefficients.size()); ++i) {
      grads[i - 1] += pulled * state.past_disturbance(j + 1 + i, n).transpose();
    }
  }
  return grads;
}

DacState ogd_update(const DacState& state, const DacParams& params, const LtiSystem& system,
                    const StageCost& cost) {
  DacState next = state;
  if (state.disturbance_history.empty() || params.learning_rate == 0.0) return next;
  const auto grads = surrogate_gradient(state.coefficients, state, params, system, cost);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].allFinite()) throw NumericalError("DAC: non-finite gradient");
    MatrixXd& m = next.coefficients[i];
    m -= params.learning_rate * grads[i];
    const double norm = m.norm();
    if (norm > params.coefficient_bound) m *= params.coefficient_bound / norm;
  }
  return next;
}

RunTrace run_dac(const DacParams& params, const LtiSystem& system, const CostSequence& costs,
                 const std::vector<VectorXd>& disturbances, const VectorXd& x1) {
  params.validate();
  if (costs.horizon() != static_cast<int>(disturbances.size()) || disturbances.empty()) {
    throw ConfigurationError("run_dac: cost and disturbance sequences must have equal positive length");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  RunTrace trace;
  trace.algorithm = "dac";
  trace.states.push_back(x1);
  DacState state = DacState::zero(system, params);
  const int horizon = costs.horizon();
  for (int t = 1; t <= horizon; ++t) {
    const VectorXd& x = trace.states.back();
    VectorXd u = dac_input(state, params, x);
    VectorXd next = step(system, x, u, disturbances[t - 1]);
    check_finite_state(next, t + 1);
    const auto& cost = *costs.stages[t - 1];
    trace.stage_costs.push_back(cost.eval(x));
    trace.batch_index.push_back(t);

    const auto update_start = Clock::now();
    state = ogd_update(state, params, system, cost);
    state.push_disturbance(recover_disturbance(system, x, u, next), params);
    trace.update_seconds.push_back(
        std::chrono::duration<double>(Clock::now() - update_start).count());

    trace.inputs.push_back(std::move(u));
    trace.states.push_back(std::move(next));
  }
  trace.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return trace;
}

}  // namespace onc
