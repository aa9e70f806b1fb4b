#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "onc/lti.hpp"

namespace onc {

/**
 * Witnesses that a gain K is (gamma, kappa)-strongly stabilizing:
 *   A - B K = transform^{-1} * contraction * transform,
 *   ||contraction|| <= 1 - gamma,  cond(transform) <= kappa.
 */
struct StabilityCertificate {
  MatrixXd gain;
  double gamma = 0.0;
  double kappa = 1.0;
  MatrixXd transform;
  MatrixXd contraction;
};

struct ControllerBank {
  std::vector<StabilityCertificate> certificates;
  double bank_gamma = 0.0;  // min over certificates
  double bank_kappa = 1.0;  // max over certificates
  double target_gamma = 0.0;
  double kappa_cap = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return certificates.size(); }
};

struct BankOptions {
  int count = 100;
  double target_gamma = 0.1;
  double kappa_cap = 50.0;
  std::uint64_t seed = 0;
};

double spectral_norm(const MatrixXd& m);
double spectral_radius(const MatrixXd& m);

/// Solves M^T P M - P = -Q for Schur-stable M by summing the series
/// sum_k (M^T)^k Q M^k in doubling form until the tail drops below 1e-14.
MatrixXd solve_discrete_lyapunov(const MatrixXd& m, const MatrixXd& q);

/// Stabilizing solution of the discrete algebraic Riccati equation, obtained
/// by iterating the Riccati recursion to a 1e-12 fixed point.
MatrixXd solve_dare(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r);

/// Discrete LQR gain K = (R + B^T P B)^{-1} B^T P A.
MatrixXd lqr_gain(const LtiSystem& system, const MatrixXd& q, const MatrixXd& r);

/// Builds witnesses for the requested gamma. Throws NotStabilizingError if
/// rho(A - BK) >= 1 and GammaTooAggressiveError if rho(A - BK) >= 1 - gamma.
StabilityCertificate certify(const LtiSystem& system, const MatrixXd& gain, double target_gamma);

/// Random LQR gains (diagonal Q, R with entries uniform on [0.1, 10]) that
/// certify at target_gamma with kappa <= kappa_cap. K = 0 comes first when it
/// qualifies. Gives up after 50 * count candidate draws.
ControllerBank generate_bank(const LtiSystem& system, const BankOptions& options);

/// ||(A - BK)^t|| for t = 1..horizon.
std::vector<double> power_norm_profile(const StabilityCertificate& cert, const LtiSystem& system,
                                       int horizon);

/// Checks the witness identities to the given relative tolerance.
bool certificate_is_valid(const StabilityCertificate& cert, const LtiSystem& system,
                          double tol = 1e-8);

nlohmann::json bank_to_json(const ControllerBank& bank);
/// Re-derives the witnesses of every stored gain against the given system.
ControllerBank bank_from_json(const nlohmann::json& doc, const LtiSystem& system);

}  // namespace onc
