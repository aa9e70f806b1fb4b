#include <gtest/gtest.h>

#include <cmath>

#include "onc/errors.hpp"
#include "onc/rng.hpp"
#include "onc/stability.hpp"
#include "test_util.hpp"

using namespace onc;
using onc::testing::mat;

namespace {

LtiSystem scaled_random(CounterRng& rng, int n, int m, double radius) {
  MatrixXd a = rng.uniform_matrix(n, n, -1, 1);
  a *= radius / spectral_radius(a);
  return LtiSystem(a, rng.uniform_matrix(n, m, -1, 1));
}

}  // namespace

TEST(SpectralRadius, StudySystemIsOneThird) {
  EXPECT_NEAR(spectral_radius(study_system().a()), 1.0 / 3.0, 1e-12);
}

TEST(SpectralRadius, RotationPair) {
  const double c = 0.8 * std::cos(0.7), s = 0.8 * std::sin(0.7);
  EXPECT_NEAR(spectral_radius(mat({{c, -s}, {s, c}})), 0.8, 1e-12);
}

TEST(SpectralNorm, Diagonal) {
  EXPECT_NEAR(spectral_norm(mat({{3, 0}, {0, -4}})), 4.0, 1e-12);
}

TEST(Lyapunov, SolvesEquation) {
  CounterRng rng(11, "stab");
  for (int k = 0; k < 10; ++k) {
    MatrixXd m = rng.uniform_matrix(4, 4, -1, 1);
    m *= 0.95 / spectral_radius(m);
    const MatrixXd p = solve_discrete_lyapunov(m, MatrixXd::Identity(4, 4));
    const MatrixXd res = m.transpose() * p * m - p + MatrixXd::Identity(4, 4);
    EXPECT_LE(res.norm(), 1e-10 * p.norm());
  }
}

TEST(Dare, RiccatiFixedPoint) {
  const LtiSystem sys = study_system();
  const MatrixXd q = MatrixXd::Identity(3, 3), r = MatrixXd::Identity(2, 2);
  const MatrixXd p = solve_dare(sys.a(), sys.b(), q, r);
  const MatrixXd& a = sys.a();
  const MatrixXd& b = sys.b();
  const MatrixXd rhs = q + a.transpose() * p * a -
                       a.transpose() * p * b * (r + b.transpose() * p * b).inverse() * b.transpose() * p * a;
  EXPECT_LE((p - rhs).norm(), 1e-10 * p.norm());
  EXPECT_LT(spectral_radius(sys.closed_loop(lqr_gain(sys, q, r))), 1.0);
}

TEST(Certify, HalfIdentityHasUnitKappa) {
  const LtiSystem sys(0.5 * MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  const auto cert = certify(sys, MatrixXd::Zero(2, 2), 0.4);
  EXPECT_NEAR(cert.kappa, 1.0, 1e-9);
  EXPECT_GE(cert.gamma, 0.4);
  EXPECT_LE(spectral_norm(cert.contraction), 1.0 - 0.4 + 1e-12);
  EXPECT_TRUE(certificate_is_valid(cert, sys));
}

TEST(Certify, UnstableClosedLoopRejected) {
  const LtiSystem sys(1.2 * MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  EXPECT_THROW(certify(sys, MatrixXd::Zero(2, 2), 0.1), NotStabilizingError);
}

TEST(Certify, GammaTooAggressive) {
  const LtiSystem sys(0.95 * MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  EXPECT_THROW(certify(sys, MatrixXd::Zero(2, 2), 0.1), GammaTooAggressiveError);
}

TEST(Certify, RandomSystemWitnesses) {
  CounterRng rng(12, "stab");
  const LtiSystem sys = scaled_random(rng, 3, 1, 0.7);
  const auto cert = certify(sys, MatrixXd::Zero(1, 3), 0.2);
  EXPECT_TRUE(certificate_is_valid(cert, sys));
  EXPECT_GE(cert.kappa, 1.0);
  const auto profile = power_norm_profile(cert, sys, 50);
  for (int t = 1; t <= 50; ++t) {
    EXPECT_LE(profile[t - 1], cert.kappa * std::pow(1.0 - cert.gamma, t) * (1 + 1e-9));
  }
}

TEST(Certify, EnvelopeHoldsAcrossRandomSystems) {
  CounterRng rng(13, "stab");
  for (int k = 0; k < 30; ++k) {
    const LtiSystem sys = scaled_random(rng, 2 + k % 4, 1 + k % 2, 0.3 + 0.02 * k);
    const auto cert = certify(sys, MatrixXd::Zero(sys.input_dim(), sys.state_dim()), 0.05);
    ASSERT_TRUE(certificate_is_valid(cert, sys));
    const auto profile = power_norm_profile(cert, sys, 100);
    for (int t = 1; t <= 100; ++t) {
      EXPECT_LE(profile[t - 1], cert.kappa * std::pow(1.0 - cert.gamma, t) * (1 + 1e-9) + 1e-300);
    }
  }
}

TEST(PowerProfile, HalfIdentity) {
  const LtiSystem sys(0.5 * MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 1));
  const auto cert = certify(sys, MatrixXd::Zero(1, 3), 0.3);
  const auto profile = power_norm_profile(cert, sys, 6);
  ASSERT_EQ(profile.size(), 6u);
  for (int t = 1; t <= 6; ++t) EXPECT_NEAR(profile[t - 1], std::pow(0.5, t), 1e-15);
}

TEST(Bank, CountOneIsZeroGain) {
  BankOptions opts;
  opts.count = 1;
  const auto bank = generate_bank(study_system(), opts);
  ASSERT_EQ(bank.size(), 1u);
  EXPECT_TRUE(bank.certificates[0].gain.isZero(0.0));
}

TEST(Bank, PaperBankRespectsTargets) {
  BankOptions opts;
  opts.count = 20;
  opts.seed = 3;
  const LtiSystem sys = study_system();
  const auto bank = generate_bank(sys, opts);
  ASSERT_EQ(bank.size(), 20u);
  double gmin = 1.0, kmax = 0.0;
  for (const auto& c : bank.certificates) {
    EXPECT_GE(c.gamma, opts.target_gamma - 1e-12);
    EXPECT_LE(c.kappa, opts.kappa_cap);
    EXPECT_TRUE(certificate_is_valid(c, sys));
    gmin = std::min(gmin, c.gamma);
    kmax = std::max(kmax, c.kappa);
  }
  EXPECT_DOUBLE_EQ(bank.bank_gamma, gmin);
  EXPECT_DOUBLE_EQ(bank.bank_kappa, kmax);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    for (std::size_t j = i + 1; j < bank.size(); ++j) {
      EXPECT_FALSE(bank.certificates[i].gain.isApprox(bank.certificates[j].gain));
    }
  }
}

TEST(Bank, SameSeedSameBank) {
  BankOptions opts;
  opts.count = 8;
  opts.seed = 9;
  const auto a = generate_bank(study_system(), opts);
  const auto b = generate_bank(study_system(), opts);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.certificates[i].gain, b.certificates[i].gain);
}

TEST(Bank, ImpossibleKappaCapFails) {
  // Strongly non-normal plant with a weak actuator: no gain is both fast and well-conditioned.
  const LtiSystem sys(mat({{0.5, 50.0}, {0.0, 0.5}}), mat({{0.0}, {1e-3}}));
  BankOptions opts;
  opts.count = 3;
  opts.kappa_cap = 1.0;
  try {
    generate_bank(sys, opts);
    FAIL() << "expected BankGenerationError";
  } catch (const BankGenerationError& e) {
    EXPECT_LT(e.produced(), 3);
  }
}

TEST(Bank, JsonRoundTrip) {
  BankOptions opts;
  opts.count = 5;
  opts.seed = 4;
  const LtiSystem sys = study_system();
  const auto bank = generate_bank(sys, opts);
  const auto back = bank_from_json(nlohmann::json::parse(bank_to_json(bank).dump()), sys);
  ASSERT_EQ(back.size(), bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_EQ(back.certificates[i].gain, bank.certificates[i].gain);
    EXPECT_NEAR(back.certificates[i].kappa, bank.certificates[i].kappa, 1e-12);
  }
  EXPECT_EQ(back.seed, bank.seed);
}
