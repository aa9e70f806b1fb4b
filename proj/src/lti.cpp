#include "onc/lti.hpp"

#include <cmath>
#include <string>

#include "onc/errors.hpp"

namespace onc {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw ConfigurationError(std::string(what) + ": expected dimension " + std::to_string(want) +
                             ", got " + std::to_string(got));
  }
}

}  // namespace

LtiSystem::LtiSystem(MatrixXd a, MatrixXd b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw ConfigurationError("LtiSystem: A must be square and non-empty");
  }
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    throw ConfigurationError("LtiSystem: B must have as many rows as A and at least one column");
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw ConfigurationError("LtiSystem: matrices must be finite");
  }
}

MatrixXd LtiSystem::closed_loop(const MatrixXd& gain) const {
  require_dim(gain.rows(), input_dim(), "gain rows");
  require_dim(gain.cols(), state_dim(), "gain cols");
  return a_ - b_ * gain;
}

LtiSystem study_system() {
  MatrixXd a(3, 3);
  a << 1.0, 0.2, 0.0,
       0.0, 1.0, 0.2,
       0.2, 0.0, 1.0;
  a /= 3.6;
  MatrixXd b(3, 2);
  b << 0.0, 1.0,
       0.0, 0.0,
       1.0, 0.0;
  return LtiSystem(std::move(a), std::move(b));
}

VectorXd step(const LtiSystem& system, const VectorXd& x, const VectorXd& u, const VectorXd& w) {
  require_dim(x.size(), system.state_dim(), "step: state");
  require_dim(u.size(), system.input_dim(), "step: input");
  require_dim(w.size(), system.state_dim(), "step: disturbance");
  return system.a() * x + system.b() * u + w;
}

SplitState step_split(const LtiSystem& system, const SplitState& split,
                      const VectorXd& nominal_input, const VectorXd& disturbance_input,
                      const VectorXd& w) {
  require_dim(split.nominal.size(), system.state_dim(), "step_split: nominal");
  require_dim(split.disturbance_driven.size(), system.state_dim(), "step_split: disturbance_driven");
  require_dim(nominal_input.size(), system.input_dim(), "step_split: nominal input");
  require_dim(disturbance_input.size(), system.input_dim(), "step_split: disturbance input");
  require_dim(w.size(), system.state_dim(), "step_split: disturbance");
  return SplitState{system.a() * split.nominal + system.b() * nominal_input,
                    system.a() * split.disturbance_driven + system.b() * disturbance_input + w};
}

void check_finite_state(const VectorXd& x, int step) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > kDivergenceBound) {
      throw DivergenceError("state diverged at step " + std::to_string(step), step);
    }
  }
}

Trajectory simulate(const LtiSystem& system, const VectorXd& x1, const Policy& policy,
                    const std::vector<VectorXd>& disturbances) {
  if (disturbances.empty()) throw ConfigurationError("simulate: horizon must be at least 1");
  require_dim(x1.size(), system.state_dim(), "simulate: initial state");

  Trajectory traj;
  const auto horizon = disturbances.size();
  traj.states.reserve(horizon + 1);
  traj.inputs.reserve(horizon);
  traj.disturbances = disturbances;
  traj.states.push_back(x1);
  for (std::size_t k = 0; k < horizon; ++k) {
    const int t = static_cast<int>(k) + 1;
    const VectorXd& x = traj.states.back();
    VectorXd u = policy(t, x);
    VectorXd next = step(system, x, u, disturbances[k]);
    check_finite_state(next, t + 1);
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

}  // namespace onc
