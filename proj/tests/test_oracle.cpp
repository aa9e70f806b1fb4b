#include <gtest/gtest.h>

#include <cmath>

#include "onc/errors.hpp"
#include "onc/oracle.hpp"
#include "onc/rng.hpp"
#include "test_util.hpp"

using namespace onc;
using onc::testing::mat;
using onc::testing::random_quadratic;
using onc::testing::vec;

namespace {

ControllerBank manual_bank(const LtiSystem& sys, const std::vector<MatrixXd>& gains, double gamma) {
  ControllerBank bank;
  bank.target_gamma = gamma;
  bank.bank_gamma = 1.0;
  for (const auto& k : gains) {
    bank.certificates.push_back(certify(sys, k, gamma));
    bank.bank_gamma = std::min(bank.bank_gamma, bank.certificates.back().gamma);
    bank.bank_kappa = std::max(bank.bank_kappa, bank.certificates.back().kappa);
  }
  return bank;
}

// A = 0, B = 0.95: the first gain has slice [-2U, 2U], the second [-U/2, U/2].
LtiSystem scalar_system() { return LtiSystem(mat({{0.0}}), mat({{0.95}})); }

std::vector<MatrixXd> two_gains() { return {mat({{-0.525 / 0.95}}), mat({{0.9 / 0.95}})}; }

CostHandle scalar_quadratic(double center) {
  return std::make_shared<QuadraticCost>(mat({{1.0}}), vec({center}));
}

}  // namespace

TEST(OracleConfig, ToleranceBudget) {
  const InputBall ball(2.0);
  const auto cfg = OracleConfig::for_epsilon(1e-3, ball);
  EXPECT_DOUBLE_EQ(cfg.inner_tolerance, 1e-3 / 8.0);
  EXPECT_NO_THROW(cfg.validate(ball));
  OracleConfig loose = cfg;
  loose.inner_tolerance *= 2.0;
  EXPECT_THROW(loose.validate(ball), ConfigurationError);
  OracleConfig bad = cfg;
  bad.epsilon = 0.0;
  EXPECT_THROW(bad.validate(ball), ConfigurationError);
}

TEST(SliceMin, ScalarClampsToBoundary) {
  const LtiSystem sys(mat({{0.0}}), mat({{1.0}}));
  const auto bank = manual_bank(sys, {mat({{0.0}})}, 0.5);
  const InputBall ball(2.0);
  const auto r = approx_min(*scalar_quadratic(5.0), sys, bank, ball, OracleConfig::for_epsilon(1e-9, ball));
  EXPECT_NEAR(r.target.point(0), 2.0, 1e-9);
  EXPECT_NEAR(r.value, 9.0, 1e-8);
}

TEST(SliceMin, InteriorMinimum) {
  const LtiSystem sys(mat({{0.0}}), mat({{1.0}}));
  const auto bank = manual_bank(sys, {mat({{0.0}})}, 0.5);
  const InputBall ball(2.0);
  const auto r = approx_min(*scalar_quadratic(0.5), sys, bank, ball, OracleConfig::for_epsilon(1e-9, ball));
  EXPECT_NEAR(r.target.point(0), 0.5, 1e-6);
  EXPECT_LE(r.value, 1e-9);
}

TEST(BankOracle, WiderSliceWins) {
  const LtiSystem sys = scalar_system();
  const auto bank = manual_bank(sys, two_gains(), 0.05);
  const InputBall ball(1.0);
  const auto slices = BankOracle(sys, bank, ball, OracleConfig::for_epsilon(1e-6, ball)).slices();
  EXPECT_NEAR(slices[0].map(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(slices[1].map(0, 0), 0.5, 1e-12);
  const auto r = approx_min(*scalar_quadratic(1.0), sys, bank, ball, OracleConfig::for_epsilon(1e-9, ball));
  EXPECT_EQ(r.bank_index, 0);
  EXPECT_NEAR(r.target.point(0), 1.0, 1e-6);
  EXPECT_LE(r.value, 1e-9);
}

TEST(BankOracle, TiesGoToLowestIndex) {
  const LtiSystem sys = scalar_system();
  const auto g = two_gains();
  const auto bank = manual_bank(sys, {g[1], g[1], g[0]}, 0.05);
  const InputBall ball(1.0);
  // The optimum 0.3 is interior to every slice, so all three tie at value 0.
  const auto r = approx_min(*scalar_quadratic(0.3), sys, bank, ball, OracleConfig::for_epsilon(1e-9, ball));
  EXPECT_EQ(r.bank_index, 0);
}

TEST(BankOracle, RefiningBankNeverHurts) {
  const LtiSystem sys = study_system();
  BankOptions opts;
  opts.count = 12;
  opts.seed = 5;
  const auto full = generate_bank(sys, opts);
  CounterRng rng(41, "oracle");
  const InputBall ball(3.0);
  const auto cfg = OracleConfig::for_epsilon(1e-6, ball);
  for (int k = 0; k < 10; ++k) {
    const auto f = random_quadratic(rng, 3, 10.0);
    double previous = INFINITY;
    for (std::size_t size = 1; size <= full.size(); size += 3) {
      ControllerBank sub = full;
      sub.certificates.resize(size);
      const double v = approx_min(*f, sys, sub, ball, cfg).value;
      EXPECT_LE(v, previous + 1e-6);
      previous = v;
    }
  }
}

TEST(BankOracle, OutputIsFeasibleFixedPoint) {
  const LtiSystem sys = study_system();
  BankOptions opts;
  opts.count = 6;
  const auto bank = generate_bank(sys, opts);
  CounterRng rng(42, "oracle");
  const InputBall ball(10.0);
  BankOracle oracle(sys, bank, ball, OracleConfig::for_epsilon(1e-4, ball));
  for (int k = 0; k < 20; ++k) {
    const auto r = oracle.minimize(*random_quadratic(rng, 3, 30.0));
    EXPECT_TRUE(ball.contains(r.target.policy.offset, 1e-9));
    EXPECT_LE(fixed_point_residual(sys, r.target), 1e-10);
    EXPECT_GE(r.bank_index, 0);
    EXPECT_LT(r.bank_index, 6);
  }
}

TEST(BankOracle, QuadraticAndGenericPathsAgree) {
  const LtiSystem sys = study_system();
  BankOptions opts;
  opts.count = 3;
  const auto bank = generate_bank(sys, opts);
  CounterRng rng(43, "oracle");
  const InputBall ball(5.0);
  const auto cfg = OracleConfig::for_epsilon(1e-6, ball);
  for (int k = 0; k < 5; ++k) {
    const auto q = random_quadratic(rng, 3, 20.0);
    const FunctionCost generic(3, [&](const VectorXd& x) { return q->eval(x); },
                               [&](const VectorXd& x) { return q->gradient(x); });
    const double a = approx_min(*q, sys, bank, ball, cfg).value;
    const double b = approx_min(generic, sys, bank, ball, cfg).value;
    EXPECT_NEAR(a, b, 1e-6);
  }
}

TEST(PullBack, MatchesPulledValueAndGradient) {
  CounterRng rng(44, "oracle");
  const auto q = random_quadratic(rng, 3);
  const SliceMap s{rng.uniform_matrix(3, 2, -1, 1)};
  const QuadraticForm pulled = pull_back(*q->quadratic_form(), s);
  for (int k = 0; k < 10; ++k) {
    const VectorXd v = rng.uniform_vector(2, -3, 3);
    EXPECT_NEAR(pulled.eval(v), pulled_value(*q, s, v), 1e-10 * std::max(1.0, pulled.eval(v)));
    EXPECT_LE(onc::testing::rel_diff(pulled.gradient(v), pulled_gradient(*q, s, v)), 1e-12);
  }
}

TEST(SliceMin, IterationCapRaises) {
  const LtiSystem sys = study_system();
  BankOptions opts;
  opts.count = 1;
  const auto bank = generate_bank(sys, opts);
  const InputBall ball(10.0);
  auto cfg = OracleConfig::for_epsilon(1e-12, ball, 1);
  CounterRng rng(45, "oracle");
  const FunctionCost f(3, [](const VectorXd& x) { return std::log(std::cosh(x(0) - 3)) + x.squaredNorm(); });
  try {
    approx_min(f, sys, bank, ball, cfg);
    FAIL() << "expected OracleAccuracyError";
  } catch (const OracleAccuracyError& e) {
    EXPECT_EQ(e.slice(), 0);
  }
}
