#include <gtest/gtest.h>

#include <cmath>

#include "onc/costs.hpp"
#include "onc/errors.hpp"
#include "onc/rng.hpp"
#include "test_util.hpp"

using namespace onc;
using onc::testing::finite_difference;
using onc::testing::random_quadratic;
using onc::testing::rel_diff;
using onc::testing::vec;

namespace {

CostHandle identity_cost(Eigen::Index n, VectorXd center) {
  return std::make_shared<QuadraticCost>(MatrixXd::Identity(n, n), std::move(center));
}

}  // namespace

TEST(QuadraticCost, ValueAndGradient) {
  const auto f = identity_cost(3, VectorXd::Zero(3));
  EXPECT_DOUBLE_EQ(f->eval(vec({3, 4, 0})), 25.0);
  EXPECT_EQ(f->gradient(vec({1, 0, 0})), vec({2, 0, 0}));
}

TEST(QuadraticCost, RejectsMismatchedShapes) {
  EXPECT_THROW(QuadraticCost(MatrixXd::Identity(2, 2), VectorXd::Zero(3)), ConfigurationError);
  EXPECT_THROW(QuadraticCost(MatrixXd::Identity(2, 3), VectorXd::Zero(2)), ConfigurationError);
}

TEST(QuadraticCost, FormMatchesEval) {
  CounterRng rng(31, "costs");
  for (int k = 0; k < 20; ++k) {
    const auto f = random_quadratic(rng, 3);
    const QuadraticForm form = *f->quadratic_form();
    const VectorXd x = rng.uniform_vector(3, -10, 10);
    EXPECT_NEAR(form.eval(x), f->eval(x), 1e-10 * std::max(1.0, f->eval(x)));
    EXPECT_LE(rel_diff(form.gradient(x), f->gradient(x)), 1e-12);
  }
}

TEST(QuadraticCost, GradientMatchesFiniteDifference) {
  CounterRng rng(32, "costs");
  for (int k = 0; k < 20; ++k) {
    const auto f = random_quadratic(rng, 4);
    const VectorXd x = rng.uniform_vector(4, -5, 5);
    const VectorXd fd = finite_difference([&](const VectorXd& y) { return f->eval(y); }, x);
    EXPECT_LE(rel_diff(fd, f->gradient(x)), 1e-6);
  }
}

TEST(FunctionCost, NumericGradientFallback) {
  const FunctionCost f(2, [](const VectorXd& x) { return std::log(std::cosh(x(0))) + x(1) * x(1) * x(1); });
  const VectorXd x = vec({0.7, -1.3});
  EXPECT_LE(rel_diff(f.gradient(x), vec({std::tanh(0.7), 3 * 1.69})), 1e-8);
  EXPECT_FALSE(f.quadratic_form().has_value());
}

TEST(TranslatedCost, ShiftsArgument) {
  CounterRng rng(33, "costs");
  const auto base = random_quadratic(rng, 3);
  const VectorXd shift = vec({0.5, -1, 2});
  const TranslatedCost g(base, shift);
  const VectorXd x = vec({1, 2, 3});
  EXPECT_DOUBLE_EQ(g.eval(x), base->eval(x + shift));
  EXPECT_EQ(g.gradient(x), base->gradient(x + shift));
  EXPECT_NEAR(g.quadratic_form()->eval(x), g.eval(x), 1e-10 * g.eval(x));
}

TEST(SumCost, AddsTerms) {
  CounterRng rng(34, "costs");
  std::vector<CostHandle> terms;
  for (int k = 0; k < 4; ++k) terms.push_back(random_quadratic(rng, 2));
  const SumCost sum(terms);
  const VectorXd x = vec({0.3, -0.4});
  double v = 0.0;
  VectorXd g = VectorXd::Zero(2);
  for (const auto& t : terms) {
    v += t->eval(x);
    g += t->gradient(x);
  }
  EXPECT_NEAR(sum.eval(x), v, 1e-12 * v);
  EXPECT_LE(rel_diff(sum.gradient(x), g), 1e-14);
  EXPECT_NEAR(sum.quadratic_form()->eval(x), v, 1e-10 * v);
}

TEST(SumCost, NonQuadraticTermHasNoForm) {
  std::vector<CostHandle> terms{identity_cost(1, vec({0})),
                                std::make_shared<FunctionCost>(1, [](const VectorXd& x) { return x(0); })};
  EXPECT_FALSE(SumCost(terms).quadratic_form().has_value());
}

TEST(SumCost, RejectsEmptyAndMixedDims) {
  EXPECT_THROW(SumCost({}), ConfigurationError);
  EXPECT_THROW(SumCost({identity_cost(1, vec({0})), identity_cost(2, vec({0, 0}))}), ConfigurationError);
}

TEST(Perturbation, LiteralValue) {
  const auto p = PerturbationTerm::literal(vec({1, 1, 1}));
  EXPECT_DOUBLE_EQ(p.eval(vec({1, 2, 3})), 6.0);
  EXPECT_EQ(p.gradient(vec({9, 9, 9})), vec({1, 1, 1}));
}

TEST(Perturbation, LiteralRejectsNegativeSigma) {
  EXPECT_THROW(PerturbationTerm::literal(vec({1, -1})), ConfigurationError);
}

TEST(Perturbation, SampleMeanIsInverseRate) {
  CounterRng rng(35, "sigma");
  const double eta = 0.25;
  const auto p = PerturbationTerm::sample(20000, eta, SignMode::kLiteral, rng);
  EXPECT_GE(p.sigma().minCoeff(), 0.0);
  EXPECT_NEAR(p.sigma().mean(), 1.0 / eta, 0.1);
  EXPECT_EQ(p.signed_sigma(), p.sigma());
}

TEST(Perturbation, RandomSignHasBothSigns) {
  CounterRng rng(36, "sigma");
  const auto p = PerturbationTerm::sample(2000, 1.0, SignMode::kRandomSign, rng);
  EXPECT_EQ(p.signed_sigma().cwiseAbs(), p.sigma());
  const double positive = (p.signed_sigma().array() > 0).cast<double>().mean();
  EXPECT_NEAR(positive, 0.5, 0.05);
  EXPECT_THROW(PerturbationTerm::sample(3, 0.0, SignMode::kLiteral, rng), ConfigurationError);
}

TEST(BatchCost, FullAndShortBatches) {
  CostSequence costs;
  for (int t = 1; t <= 7; ++t) costs.stages.push_back(identity_cost(1, vec({double(t)})));
  const VectorXd x = vec({0.0});
  // Batch 2 with H = 3 covers stages 4..6.
  EXPECT_DOUBLE_EQ(batch_cost(costs, 2, 3)->eval(x), 16.0 + 25.0 + 36.0);
  // Batch 3 is the single stage 7.
  EXPECT_DOUBLE_EQ(batch_cost(costs, 3, 3)->eval(x), 49.0);
  EXPECT_THROW(batch_cost(costs, 4, 3), ConfigurationError);
  EXPECT_THROW(batch_cost(costs, 0, 3), ConfigurationError);
}

TEST(BatchCost, BatchesPartitionTheHorizon) {
  CounterRng rng(37, "costs");
  CostSequence costs;
  for (int t = 0; t < 23; ++t) costs.stages.push_back(random_quadratic(rng, 2));
  const VectorXd x = vec({0.4, -0.9});
  double whole = 0.0;
  for (const auto& s : costs.stages) whole += s->eval(x);
  for (int h : {1, 4, 5, 23, 30}) {
    double parts = 0.0;
    for (int n = 1; (n - 1) * h < 23; ++n) parts += batch_cost(costs, n, h)->eval(x);
    EXPECT_NEAR(parts, whole, 1e-12 * whole);
  }
}

TEST(Lipschitz, ScaleBoundsGradientsOnDomain) {
  CounterRng rng(38, "costs");
  CostSequence costs;
  for (int t = 0; t < 30; ++t) costs.stages.push_back(random_quadratic(rng, 3));
  costs.domain_radius = 12.0;
  costs.lipschitz_scale = quadratic_lipschitz_scale(costs.stages, costs.domain_radius);
  EXPECT_TRUE(gradient_bound_holds(costs, 200, rng));
  costs.lipschitz_scale *= 0.5;
  EXPECT_FALSE(gradient_bound_holds(costs, 2000, rng));
}

TEST(Lipschitz, SingleIdentityCost) {
  // 2 ||I|| (D + ||c||) / D with D = 4, c = (3, 0).
  EXPECT_DOUBLE_EQ(quadratic_lipschitz_scale({identity_cost(2, vec({3, 0}))}, 4.0), 3.5);
}

TEST(CostsJson, RoundTripIsExact) {
  CounterRng rng(39, "costs");
  CostSequence costs;
  for (int t = 0; t < 5; ++t) costs.stages.push_back(random_quadratic(rng, 3));
  costs.domain_radius = 7.5;
  costs.lipschitz_scale = quadratic_lipschitz_scale(costs.stages, 7.5);
  const auto back = costs_from_json(nlohmann::json::parse(costs_to_json(costs).dump()));
  ASSERT_EQ(back.horizon(), 5);
  EXPECT_EQ(back.lipschitz_scale, costs.lipschitz_scale);
  const VectorXd x = vec({1, -2, 0.5});
  for (int t = 0; t < 5; ++t) EXPECT_EQ(back.stages[t]->eval(x), costs.stages[t]->eval(x));
}

TEST(CostsJson, MalformedIsConfigError) {
  EXPECT_THROW(costs_from_json(nlohmann::json::parse(R"({"stages": 3})")), ConfigurationError);
}
