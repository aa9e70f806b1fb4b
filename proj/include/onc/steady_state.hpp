#pragma once

#include "onc/lti.hpp"
#include "onc/stability.hpp"

namespace onc {

/// Euclidean ball of admissible input offsets, ||v|| <= radius.
class InputBall {
 public:
  explicit InputBall(double radius = 10.0);

  double radius() const { return radius_; }
  bool contains(const VectorXd& v, double slack = 1e-12) const;
  VectorXd project(const VectorXd& v) const;

 private:
  double radius_;
};

/// u = -K x + v.
struct AffinePolicy {
  StabilityCertificate certificate;
  VectorXd offset;

  VectorXd input(const VectorXd& x) const { return -certificate.gain * x + offset; }
};

/// z = (A - BK) z + B v, together with the realizing policy.
struct SteadyStateTarget {
  VectorXd point;
  AffinePolicy policy;
};

/// Linear image of the input ball for a fixed gain: X(K) = { map * v : ||v|| <= U }.
struct SliceMap {
  MatrixXd map;  // (I - A + BK)^{-1} B, N x M
};

SliceMap ball_parametrization(const LtiSystem& system, const StabilityCertificate& cert);

SteadyStateTarget steady_state_of(const LtiSystem& system, const AffinePolicy& policy);

/// kappa / gamma * ||B|| * U: bound on every steady state reachable with
/// ||v|| <= U under a (gamma, kappa)-strongly stabilizing gain.
double steady_state_radius(const LtiSystem& system, double gamma, double kappa,
                           const InputBall& ball);

/// Residual ||z - (A - BK) z - B v|| relative to max(1, ||z||).
double fixed_point_residual(const LtiSystem& system, const SteadyStateTarget& target);

}  // namespace onc
