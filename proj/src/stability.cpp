#include "onc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "onc/errors.hpp"
#include "onc/json_eigen.hpp"
#include "onc/rng.hpp"

namespace onc {

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double spectral_radius(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw ConfigurationError("spectral_radius: matrix must be square");
  Eigen::EigenSolver<MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_radius: eigenvalue solve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXd solve_discrete_lyapunov(const MatrixXd& m, const MatrixXd& q) {
  if (m.rows() != m.cols() || q.rows() != m.rows() || q.cols() != m.cols()) {
    throw ConfigurationError("solve_discrete_lyapunov: dimension mismatch");
  }
  if (spectral_radius(m) >= 1.0) {
    throw NotStabilizingError("solve_discrete_lyapunov: M is not Schur stable");
  }
  // P_{k+1} = P_k + A_k^T P_k A_k with A_{k+1} = A_k^2 adds 2^k series terms per pass.
  MatrixXd p = q;
  MatrixXd power = m;
  for (int pass = 0; pass < 64; ++pass) {
    MatrixXd term = power.transpose() * p * power;
    p += term;
    if (term.norm() <= 1e-14 * std::max(1.0, p.norm())) {
      return 0.5 * (p + p.transpose());
    }
    power = power * power;
  }
  throw NumericalError("solve_discrete_lyapunov: series did not converge");
}

MatrixXd solve_dare(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r) {
  MatrixXd p = q;
  for (int it = 0; it < 200000; ++it) {
    const MatrixXd btp = b.transpose() * p;
    const MatrixXd gain = (r + btp * b).ldlt().solve(btp * a);
    MatrixXd next = q + a.transpose() * p * a - a.transpose() * p * b * gain;
    next = 0.5 * (next + next.transpose());
    const double change = (next - p).norm();
    p = std::move(next);
    if (!p.allFinite()) break;
    if (change <= 1e-12 * std::max(1.0, p.norm())) return p;
  }
  throw NumericalError("solve_dare: Riccati recursion did not converge");
}

MatrixXd lqr_gain(const LtiSystem& system, const MatrixXd& q, const MatrixXd& r) {
  const MatrixXd& a = system.a();
  const MatrixXd& b = system.b();
  const MatrixXd p = solve_dare(a, b, q, r);
  const MatrixXd btp = b.transpose() * p;
  return (r + btp * b).ldlt().solve(btp * a);
}

StabilityCertificate certify(const LtiSystem& system, const MatrixXd& gain, double target_gamma) {
  if (!(target_gamma > 0.0 && target_gamma < 1.0)) {
    throw ConfigurationError("certify: target_gamma must lie in (0, 1)");
  }
  const MatrixXd closed = system.closed_loop(gain);
  const double rho = spectral_radius(closed);
  if (rho >= 1.0) {
    throw NotStabilizingError("certify: spectral radius " + std::to_string(rho) + " >= 1");
  }
  if (rho >= 1.0 - target_gamma) {
    throw GammaTooAggressiveError("certify: spectral radius " + std::to_string(rho) +
                                  " leaves no room for gamma " + std::to_string(target_gamma));
  }

  const auto n = system.state_dim();
  const MatrixXd scaled = closed / (1.0 - target_gamma);
  const MatrixXd p = solve_discrete_lyapunov(scaled, MatrixXd::Identity(n, n));

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p);
  if (eig.info() != Eigen::Success) throw NumericalError("certify: eigen-decomposition failed");
  const VectorXd lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) throw NumericalError("certify: Lyapunov solution not positive");
  const MatrixXd& vecs = eig.eigenvectors();
  const MatrixXd root = vecs * lambda.cwiseSqrt().asDiagonal() * vecs.transpose();
  const MatrixXd inv_root = vecs * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * vecs.transpose();

  StabilityCertificate cert;
  cert.gain = gain;
  cert.gamma = target_gamma;
  cert.kappa = std::sqrt(lambda.maxCoeff() / lambda.minCoeff());
  cert.transform = root;
  cert.contraction = root * closed * inv_root;
  return cert;
}

bool certificate_is_valid(const StabilityCertificate& cert, const LtiSystem& system, double tol) {
  const MatrixXd closed = system.closed_loop(cert.gain);
  const MatrixXd inv = cert.transform.inverse();
  const MatrixXd rebuilt = inv * cert.contraction * cert.transform;
  const double scale = std::max(1.0, closed.norm());
  if ((rebuilt - closed).norm() > tol * scale) return false;
  if (spectral_norm(cert.contraction) > 1.0 - cert.gamma + 1e-10) return false;
  if (spectral_norm(cert.transform) * spectral_norm(inv) > cert.kappa * (1.0 + tol) + 1e-10) {
    return false;
  }
  return true;
}

namespace {

bool is_distinct(const std::vector<StabilityCertificate>& certs, const MatrixXd& gain) {
  return std::none_of(certs.begin(), certs.end(), [&](const StabilityCertificate& c) {
    return (c.gain - gain).norm() <= 1e-8 * (1.0 + c.gain.norm());
  });
}

bool try_add(std::vector<StabilityCertificate>& certs, const LtiSystem& system,
             const MatrixXd& gain, const BankOptions& options) {
  if (!is_distinct(certs, gain)) return false;
  try {
    StabilityCertificate cert = certify(system, gain, options.target_gamma);
    if (cert.kappa > options.kappa_cap) return false;
    certs.push_back(std::move(cert));
    return true;
  } catch (const NumericalError&) {
    return false;
  }
}

void finalize(ControllerBank& bank) {
  bank.bank_gamma = 1.0;
  bank.bank_kappa = 1.0;
  for (const auto& c : bank.certificates) {
    bank.bank_gamma = std::min(bank.bank_gamma, c.gamma);
    bank.bank_kappa = std::max(bank.bank_kappa, c.kappa);
  }
}

}  // namespace

ControllerBank generate_bank(const LtiSystem& system, const BankOptions& options) {
  if (options.count < 1) throw ConfigurationError("generate_bank: count must be positive");
  if (!(options.kappa_cap >= 1.0)) throw ConfigurationError("generate_bank: kappa_cap must be >= 1");

  const auto n = system.state_dim();
  const auto m = system.input_dim();
  ControllerBank bank;
  bank.target_gamma = options.target_gamma;
  bank.kappa_cap = options.kappa_cap;
  bank.seed = options.seed;
  auto& certs = bank.certificates;

  try_add(certs, system, MatrixXd::Zero(m, n), options);

  CounterRng rng(options.seed, "bank");
  const long max_draws = 50L * options.count;
  for (long draw = 0; draw < max_draws && static_cast<int>(certs.size()) < options.count; ++draw) {
    const VectorXd q = rng.uniform_vector(n, 0.1, 10.0);
    const VectorXd r = rng.uniform_vector(m, 0.1, 10.0);
    MatrixXd gain;
    try {
      gain = lqr_gain(system, q.asDiagonal(), r.asDiagonal());
    } catch (const NumericalError&) {
      continue;
    }
    try_add(certs, system, gain, options);
  }

  if (static_cast<int>(certs.size()) < options.count) {
    throw BankGenerationError("generate_bank: produced " + std::to_string(certs.size()) + " of " +
                                  std::to_string(options.count) + " certified gains",
                              static_cast<int>(certs.size()));
  }
  finalize(bank);
  return bank;
}

std::vector<double> power_norm_profile(const StabilityCertificate& cert, const LtiSystem& system,
                                       int horizon) {
  if (horizon < 1) throw ConfigurationError("power_norm_profile: horizon must be >= 1");
  const MatrixXd closed = system.closed_loop(cert.gain);
  std::vector<double> out;
  out.reserve(horizon);
  MatrixXd power = closed;
  for (int t = 1; t <= horizon; ++t) {
    out.push_back(spectral_norm(power));
    power = power * closed;
  }
  return out;
}

nlohmann::json bank_to_json(const ControllerBank& bank) {
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : bank.certificates) {
    certs.push_back({{"gain", to_json(c.gain)}, {"gamma", c.gamma}, {"kappa", c.kappa}});
  }
  return {{"seed", bank.seed},
          {"target_gamma", bank.target_gamma},
          {"kappa_cap", bank.kappa_cap},
          {"gamma", bank.bank_gamma},
          {"kappa", bank.bank_kappa},
          {"certificates", std::move(certs)}};
}

ControllerBank bank_from_json(const nlohmann::json& doc, const LtiSystem& system) {
  ControllerBank bank;
  try {
    bank.seed = doc.at("seed").get<std::uint64_t>();
    bank.target_gamma = doc.at("target_gamma").get<double>();
    bank.kappa_cap = doc.at("kappa_cap").get<double>();
    for (const auto& entry : doc.at("certificates")) {
      const MatrixXd gain = matrix_from_json(entry.at("gain"));
      bank.certificates.push_back(certify(system, gain, entry.at("gamma").get<double>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("bank_from_json: ") + e.what());
  }
  if (bank.certificates.empty()) throw ConfigurationError("bank_from_json: empty bank");
  finalize(bank);
  return bank;
}

}  // namespace onc
