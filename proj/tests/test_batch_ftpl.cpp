#include <gtest/gtest.h>

#include <cmath>

#include "onc/batch_ftpl.hpp"
#include "onc/errors.hpp"
#include "onc/oracle.hpp"
#include "onc/rng.hpp"
#include "test_util.hpp"

using namespace onc;
using onc::testing::mat;
using onc::testing::random_quadratic;
using onc::testing::vec;

namespace {

struct Scalar {
  LtiSystem system{mat({{0.0}}), mat({{1.0}})};
  ControllerBank bank;
  InputBall ball{2.0};

  Scalar() {
    bank.certificates.push_back(certify(system, mat({{0.0}}), 0.5));
    bank.bank_gamma = bank.certificates[0].gamma;
    bank.bank_kappa = bank.certificates[0].kappa;
  }
};

BatchFtplParams base_params(int horizon, int batch_size) {
  BatchFtplParams p;
  p.horizon = horizon;
  p.batch_size = batch_size;
  p.eta = 1.0;
  p.epsilon = 1e-8;
  p.rng_seed = 7;
  return p;
}

CostSequence repeated(const CostHandle& f, int horizon) {
  CostSequence c;
  c.stages.assign(horizon, f);
  return c;
}

CostSequence random_costs(CounterRng& rng, int n, int horizon) {
  CostSequence c;
  for (int t = 0; t < horizon; ++t) c.stages.push_back(random_quadratic(rng, n));
  return c;
}

ControllerBank study_bank(int count, std::uint64_t seed = 0) {
  BankOptions opts;
  opts.count = count;
  opts.seed = seed;
  return generate_bank(study_system(), opts);
}

}  // namespace

TEST(DeriveBatchSize, Examples) {
  EXPECT_EQ(derive_batch_size(0.5, 1.0), 1);
  EXPECT_EQ(derive_batch_size(0.5, 2.0), 2);
  EXPECT_EQ(derive_batch_size(0.1, 10.0), 29);
  EXPECT_NEAR(10.0 * std::pow(0.9, 29), 0.47101286972462448, 1e-15);
  EXPECT_EQ(derive_batch_size(1.0, 5.0), 1);
}

TEST(DeriveBatchSize, ContractionHoldsOnGrid) {
  for (double g = 0.01; g < 1.0; g += 0.037) {
    for (double k = 1.0; k < 200.0; k *= 1.7) {
      const int h = derive_batch_size(g, k);
      EXPECT_LE(k * std::pow(1.0 - g, h), 0.5 + 1e-12);
      if (h > 1) EXPECT_GT(k * std::pow(1.0 - g, h - 1), 0.5 - 1e-12);
    }
  }
}

TEST(DeriveBatchSize, RejectsOutOfRange) {
  EXPECT_THROW(derive_batch_size(0.0, 2.0), ConfigurationError);
  EXPECT_THROW(derive_batch_size(1.5, 2.0), ConfigurationError);
  EXPECT_THROW(derive_batch_size(0.5, 0.5), ConfigurationError);
}

TEST(DeriveEta, FrozenValue) {
  EXPECT_NEAR(derive_eta(1.0, 3, 500, 0.5, 2.0), 2.26892158260375935918605929683e-4, 1e-18);
}

TEST(DeriveEta, Scalings) {
  const double base = derive_eta(1.0, 3, 500, 0.2, 3.0);
  EXPECT_NEAR(derive_eta(1.0, 3, 1000, 0.2, 3.0), base / std::sqrt(2.0), 1e-15 * base);
  EXPECT_NEAR(derive_eta(4.0, 3, 500, 0.2, 3.0), base / 4.0, 1e-15 * base);
  EXPECT_THROW(derive_eta(0.0, 3, 500, 0.2, 3.0), ConfigurationError);
  EXPECT_THROW(derive_eta(1.0, 3, 500, 1.0, 3.0), ConfigurationError);
}

TEST(Params, Validation) {
  auto p = base_params(10, 2);
  EXPECT_NO_THROW(p.validate());
  p.disturbance_mode = true;
  EXPECT_THROW(p.validate(), ConfigurationError);
  p = base_params(10, 0);
  EXPECT_THROW(p.validate(), ConfigurationError);
  p = base_params(10, 2);
  p.eta = 0.0;
  EXPECT_THROW(p.validate(), ConfigurationError);
}

TEST(Init, SameSeedSameStart) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(5);
  const BatchFtpl a(base_params(20, 4), sys, bank, InputBall(10.0), VectorXd::Zero(3));
  const BatchFtpl b(base_params(20, 4), sys, bank, InputBall(10.0), VectorXd::Zero(3));
  EXPECT_EQ(a.perturbation().sigma(), b.perturbation().sigma());
  EXPECT_EQ(a.target().point, b.target().point);
  EXPECT_EQ(a.batch_index(), 1);
  EXPECT_EQ(a.time(), 1);
}

TEST(Init, ZeroSigmaGivesOrigin) {
  Scalar s;
  auto p = base_params(10, 2);
  p.sigma_override = vec({0.0});
  const BatchFtpl f(p, s.system, s.bank, s.ball, vec({0.0}));
  EXPECT_EQ(f.target().point(0), 0.0);
}

TEST(Init, HugeEtaApproachesZeroSigma) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(4);
  // With epsilon = 1e-3 the gradient of sigma ~ 1e-6 is below the inner tolerance.
  auto zero = base_params(20, 4);
  zero.epsilon = 1e-3;
  zero.sigma_override = VectorXd::Zero(3);
  auto big = zero;
  big.sigma_override.reset();
  big.eta = 1e6;
  const BatchFtpl a(zero, sys, bank, InputBall(10.0), VectorXd::Zero(3));
  const BatchFtpl b(big, sys, bank, InputBall(10.0), VectorXd::Zero(3));
  EXPECT_LE((a.target().point - b.target().point).norm(), 1e-6);
}

TEST(ControlInput, TargetIsFixedPoint) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(5);
  const BatchFtpl f(base_params(20, 4), sys, bank, InputBall(10.0), VectorXd::Zero(3));
  const VectorXd z = f.target().point;
  EXPECT_LE((step(sys, z, f.control_input(z), VectorXd::Zero(3)) - z).norm(), 1e-9 * std::max(1.0, z.norm()));
}

TEST(ControlInput, DisturbanceModeCollapsesWithoutDisturbance) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(5);
  auto p = base_params(20, 4);
  const BatchFtpl nominal(p, sys, bank, InputBall(10.0), vec({1, 2, 3}));
  p.disturbance_mode = true;
  p.anchor_gain = bank.certificates[0];
  const BatchFtpl split(p, sys, bank, InputBall(10.0), vec({1, 2, 3}));
  const VectorXd x = vec({1, 2, 3});
  EXPECT_EQ(nominal.control_input(x), split.control_input(x));
}

TEST(Observe, UnitBatchRetargetsEveryStep) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(4);
  CounterRng rng(51, "ftpl");
  const InputBall ball(10.0);
  auto p = base_params(6, 1);
  p.sigma_override = vec({0.5, 1.0, 0.25});
  const auto costs = random_costs(rng, 3, 6);
  BatchFtpl f(p, sys, bank, ball, VectorXd::Zero(3));
  std::vector<CostHandle> terms{std::make_shared<PerturbationTerm>(PerturbationTerm::literal(*p.sigma_override))};
  VectorXd x = VectorXd::Zero(3);
  for (int t = 1; t <= 6; ++t) {
    const auto expected = approx_min(SumCost(terms), sys, bank, ball, OracleConfig::for_epsilon(1e-10, ball));
    EXPECT_LE((f.target().point - expected.target.point).norm(), 1e-3) << "t=" << t;
    EXPECT_EQ(f.batch_index(), t);
    const VectorXd next = step(sys, x, f.control_input(x), VectorXd::Zero(3));
    f.observe(costs.stages[t - 1], next, VectorXd::Zero(3));
    terms.push_back(costs.stages[t - 1]);
    x = next;
  }
  EXPECT_TRUE(f.finished());
  EXPECT_EQ(f.batches().size(), 6u);
}

TEST(Observe, AfterHorizonIsUsageError) {
  Scalar s;
  BatchFtpl f(base_params(2, 1), s.system, s.bank, s.ball, vec({0.0}));
  const auto cost = std::make_shared<QuadraticCost>(mat({{1.0}}), vec({1.0}));
  f.observe(cost, vec({0.0}), vec({0.0}));
  f.observe(cost, vec({0.0}), vec({0.0}));
  EXPECT_THROW(f.observe(cost, vec({0.0}), vec({0.0})), UsageError);
}

TEST(Observe, ConstantCostTargetSettles) {
  Scalar s;
  auto p = base_params(30, 3);
  p.sigma_override = vec({0.0});
  const auto f = std::make_shared<QuadraticCost>(mat({{1.0}}), vec({1.0}));
  const auto run = run_batch_ftpl(p, s.system, s.bank, s.ball, repeated(f, 30), std::vector<VectorXd>(30, vec({0.0})),
                                  vec({0.0}));
  const auto direct = slice_min(*f, s.system, s.bank.certificates[0], s.ball, OracleConfig::for_epsilon(1e-8, s.ball));
  ASSERT_EQ(run.batches.size(), 10u);
  for (std::size_t n = 1; n < run.batches.size(); ++n) {
    EXPECT_NEAR(run.batches[n].target.point(0), direct.point(0), 1e-7);
  }
  // x_t = 0 for t <= H + 1, then x_t = 1: the transient costs H + 1.
  EXPECT_NEAR(run.trace.cumulative(), 4.0, 1e-6);
}

TEST(Run, PolicyPiecewiseConstant) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(6);
  CounterRng rng(52, "ftpl");
  const int T = 37, H = 5;
  const auto run = run_batch_ftpl(base_params(T, H), sys, bank, InputBall(10.0), random_costs(rng, 3, T),
                                  std::vector<VectorXd>(T, VectorXd::Zero(3)), VectorXd::Zero(3));
  ASSERT_EQ(static_cast<int>(run.batches.size()), (T + H - 1) / H);
  for (int t = 1; t <= T; ++t) {
    const int n = (t - 1) / H + 1;
    EXPECT_EQ(run.trace.batch_index[t - 1], n);
    const auto& policy = run.batches[n - 1].target.policy;
    EXPECT_LE((run.trace.inputs[t - 1] - policy.input(run.trace.states[t - 1])).norm(), 1e-12);
  }
  for (const auto& b : run.batches) {
    EXPECT_EQ(b.first_step, (b.batch - 1) * H + 1);
    EXPECT_LE(fixed_point_residual(sys, b.target), 1e-9);
  }
}

TEST(Run, LedgerIsCostAtState) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(3);
  CounterRng rng(53, "ftpl");
  const auto costs = random_costs(rng, 3, 20);
  const auto run = run_batch_ftpl(base_params(20, 4), sys, bank, InputBall(10.0), costs,
                                  std::vector<VectorXd>(20, VectorXd::Zero(3)), vec({1, -1, 2}));
  for (int t = 0; t < 20; ++t) EXPECT_EQ(run.trace.stage_costs[t], costs.stages[t]->eval(run.trace.states[t]));
}

TEST(Run, SingleBatchContracts) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(1);
  CounterRng rng(54, "ftpl");
  const int T = 40;
  const auto run = run_batch_ftpl(base_params(T, T), sys, bank, InputBall(10.0), random_costs(rng, 3, T),
                                  std::vector<VectorXd>(T, VectorXd::Zero(3)), vec({5, -5, 5}));
  ASSERT_EQ(run.batches.size(), 1u);
  const auto& cert = bank.certificates[0];
  const VectorXd z = run.batches[0].target.point;
  const double e0 = (run.trace.states[0] - z).norm();
  for (int t = 1; t <= T; ++t) {
    EXPECT_LE((run.trace.states[t] - z).norm(), cert.kappa * std::pow(1 - cert.gamma, t) * e0 + 1e-9);
  }
}

TEST(Run, StatesStayInsideEnvelope) {
  const LtiSystem sys = study_system();
  const auto bank = study_bank(10, 2);
  const InputBall ball(10.0);
  const int H = derive_batch_size(bank.bank_gamma, bank.bank_kappa);
  for (int seed = 0; seed < 20; ++seed) {
    CounterRng rng(60 + seed, "ftpl");
    const VectorXd x1 = rng.uniform_vector(3, -20, 20);
    auto p = base_params(120, H);
    p.rng_seed = seed;
    p.eta = 0.05;
    p.sign_mode = seed % 2 ? SignMode::kRandomSign : SignMode::kLiteral;
    p.epsilon = 1e-4;
    const auto run = run_batch_ftpl(p, sys, bank, ball, random_costs(rng, 3, 120),
                                    std::vector<VectorXd>(120, VectorXd::Zero(3)), x1);
    const double envelope = bounded_state_envelope(sys, bank.bank_gamma, bank.bank_kappa, ball, x1);
    for (const auto& x : run.trace.states) EXPECT_LE(x.norm(), envelope);
  }
}

TEST(Run, DisturbanceComponentIgnoresBank) {
  const LtiSystem sys = study_system();
  const auto bank_a = study_bank(4, 1);
  const auto bank_b = study_bank(6, 2);
  CounterRng rng(55, "ftpl");
  const int T = 30;
  const auto costs = random_costs(rng, 3, T);
  std::vector<VectorXd> ws;
  for (int t = 0; t < T; ++t) ws.push_back(rng.uniform_vector(3, -0.5, 0.5));
  auto p = base_params(T, 3);
  p.disturbance_mode = true;
  p.anchor_gain = bank_a.certificates[0];
  const auto a = run_batch_ftpl(p, sys, bank_a, InputBall(10.0), costs, ws, VectorXd::Zero(3));
  const auto b = run_batch_ftpl(p, sys, bank_b, InputBall(10.0), costs, ws, VectorXd::Zero(3));
  ASSERT_EQ(a.disturbance_driven.size(), static_cast<std::size_t>(T + 1));
  for (int t = 0; t <= T; ++t) {
    EXPECT_LE((a.disturbance_driven[t] - b.disturbance_driven[t]).norm(), 1e-12);
    EXPECT_LE((a.nominal[t] + a.disturbance_driven[t] - a.trace.states[t]).norm(),
              1e-9 * std::max(1.0, a.trace.states[t].norm()));
  }
}

TEST(Run, RejectsLengthMismatch) {
  Scalar s;
  const auto f = std::make_shared<QuadraticCost>(mat({{1.0}}), vec({1.0}));
  EXPECT_THROW(run_batch_ftpl(base_params(5, 1), s.system, s.bank, s.ball, repeated(f, 4),
                              std::vector<VectorXd>(5, vec({0.0})), vec({0.0})),
               ConfigurationError);
}
