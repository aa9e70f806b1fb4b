#include "onc/steady_state.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "onc/errors.hpp"

namespace onc {

InputBall::InputBall(double radius) : radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ConfigurationError("InputBall: radius must be finite and positive");
  }
}

bool InputBall::contains(const VectorXd& v, double slack) const {
  return v.norm() <= radius_ + slack;
}

VectorXd InputBall::project(const VectorXd& v) const {
  const double norm = v.norm();
  if (norm <= radius_) return v;
  return v * (radius_ / norm);
}

namespace {

Eigen::PartialPivLU<MatrixXd> factor_steady_state(const LtiSystem& system, const MatrixXd& gain) {
  const auto n = system.state_dim();
  const MatrixXd lhs = MatrixXd::Identity(n, n) - system.closed_loop(gain);
  Eigen::PartialPivLU<MatrixXd> lu(lhs);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw NumericalError("steady state solve is near-singular (condition estimate " +
                         std::to_string(1.0 / rcond) + ")");
  }
  return lu;
}

}  // namespace

SliceMap ball_parametrization(const LtiSystem& system, const StabilityCertificate& cert) {
  return SliceMap{factor_steady_state(system, cert.gain).solve(system.b())};
}

SteadyStateTarget steady_state_of(const LtiSystem& system, const AffinePolicy& policy) {
  if (policy.offset.size() != system.input_dim()) {
    throw ConfigurationError("steady_state_of: offset dimension mismatch");
  }
  const auto lu = factor_steady_state(system, policy.certificate.gain);
  VectorXd z = lu.solve(system.b() * policy.offset);
  return SteadyStateTarget{std::move(z), policy};
}

double steady_state_radius(const LtiSystem& system, double gamma, double kappa,
                           const InputBall& ball) {
  return kappa / gamma * spectral_norm(system.b()) * ball.radius();
}

double fixed_point_residual(const LtiSystem& system, const SteadyStateTarget& target) {
  const auto& z = target.point;
  const VectorXd image = system.closed_loop(target.policy.certificate.gain) * z +
                         system.b() * target.policy.offset;
  return (z - image).norm() / std::max(1.0, z.norm());
}

}  // namespace onc
