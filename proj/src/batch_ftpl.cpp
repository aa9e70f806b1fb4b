#include "onc/batch_ftpl.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "onc/errors.hpp"

namespace onc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int derive_batch_size(double gamma, double kappa) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigurationError("derive_batch_size: gamma must be in (0, 1]");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigurationError("derive_batch_size: kappa must be >= 1");
  if (gamma == 1.0) return 1;
  const double ratio = std::log(2.0 * kappa) / -std::log1p(-gamma);
  int h = std::max(1, static_cast<int>(std::ceil(ratio - 1e-12)));
  // Guard the rounding slack above so the contraction inequality always holds.
  while (kappa * std::pow(1.0 - gamma, h) > 0.5) ++h;
  return h;
}

double derive_eta(double lipschitz, int state_dim, int horizon, double gamma, double kappa) {
  if (!(lipschitz > 0.0) || state_dim < 1 || horizon < 1) {
    throw ConfigurationError("derive_eta: L, N and T must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigurationError("derive_eta: gamma must be in (0, 1)");
  if (!(kappa >= 1.0)) throw ConfigurationError("derive_eta: kappa must be >= 1");
  const double bracket =
      1.0 - std::log(2.0 * kappa) / std::log1p(-gamma) + 8.0 * kappa * kappa * kappa / (gamma * gamma);
  return 1.0 / (5.0 * lipschitz *
                std::sqrt(2.0 * static_cast<double>(state_dim) * static_cast<double>(horizon) * bracket));
}

double bounded_state_envelope(const LtiSystem& system, double gamma, double kappa,
                              const InputBall& ball, const VectorXd& x1) {
  const double radius = steady_state_radius(system, gamma, kappa, ball);
  return radius + kappa * std::max(x1.norm() + radius, 4.0 * radius);
}

void BatchFtplParams::validate() const {
  if (horizon < 1) throw ConfigurationError("BatchFtpl: horizon must be >= 1");
  if (batch_size < 1) throw ConfigurationError("BatchFtpl: batch_size must be >= 1");
  if (!(eta > 0.0)) throw ConfigurationError("BatchFtpl: eta must be positive");
  if (!(epsilon > 0.0)) throw ConfigurationError("BatchFtpl: epsilon must be positive");
  if (disturbance_mode && !anchor_gain) {
    throw ConfigurationError("BatchFtpl: disturbance mode needs an anchor gain");
  }
}

BatchFtpl::BatchFtpl(BatchFtplParams params, const LtiSystem& system, const ControllerBank& bank,
                     InputBall ball, const VectorXd& x1)
    : params_((params.validate(), std::move(params))),
      system_(system),
      ball_(ball),
      oracle_(system, bank, ball,
              OracleConfig::for_epsilon(params_.epsilon, ball, params_.max_inner_iterations)),
      perturbation_([&] {
        const auto n = system.state_dim();
        if (params_.sigma_override) {
          if (params_.sigma_override->size() != n) {
            throw ConfigurationError("BatchFtpl: sigma override has the wrong dimension");
          }
          return PerturbationTerm::literal(*params_.sigma_override);
        }
        CounterRng rng(params_.rng_seed, "sigma");
        return PerturbationTerm::sample(n, params_.eta, params_.sign_mode, rng);
      }()),
      x_(x1),
      split_{x1, VectorXd::Zero(system.state_dim())} {
  if (x1.size() != system.state_dim()) throw ConfigurationError("BatchFtpl: x1 dimension mismatch");
  accumulated_form_ = perturbation_.quadratic_form();
  accumulated_terms_.push_back(std::make_shared<PerturbationTerm>(perturbation_));
  retarget();
}

void BatchFtpl::retarget() {
  const auto start = Clock::now();
  OracleResult result;
  if (accumulated_form_) {
    result = oracle_.minimize(QuadraticObjective(*accumulated_form_));
  } else {
    result = oracle_.minimize(SumCost(accumulated_terms_));
  }
  BatchRecord record;
  record.batch = batch_;
  record.first_step = t_;
  record.target = std::move(result.target);
  record.bank_index = result.bank_index;
  record.oracle_value = result.value;
  record.inner_iterations = result.inner_iterations;
  record.oracle_seconds = seconds_since(start);
  batches_.push_back(std::move(record));
}

VectorXd BatchFtpl::anchor_input(const VectorXd& xd) const { return -params_.anchor_gain->gain * xd; }

VectorXd BatchFtpl::control_input(const VectorXd& x) const {
  const AffinePolicy& p = policy();
  if (!params_.disturbance_mode) return p.input(x);
  return p.input(split_.nominal) + anchor_input(split_.disturbance_driven);
}

double BatchFtpl::observe(const CostHandle& cost, const VectorXd& next_x, const VectorXd& w) {
  if (finished_) throw UsageError("BatchFtpl::observe called after the horizon ended");
  if (!cost || cost->dim() != system_.state_dim()) {
    throw ConfigurationError("BatchFtpl::observe: cost dimension mismatch");
  }

  CostHandle learned = cost;
  double incurred = 0.0;
  if (params_.disturbance_mode) {
    learned = std::make_shared<TranslatedCost>(cost, split_.disturbance_driven);
    incurred = learned->eval(split_.nominal);
    const AffinePolicy& p = policy();
    split_ = step_split(system_, split_, p.input(split_.nominal),
                        anchor_input(split_.disturbance_driven), w);
  } else {
    incurred = cost->eval(x_);
  }
  x_ = next_x;

  if (accumulated_form_) {
    if (auto form = learned->quadratic_form()) {
      *accumulated_form_ += *form;
    } else {
      accumulated_form_.reset();
    }
  }
  accumulated_terms_.push_back(std::move(learned));

  if (t_ == params_.horizon) {
    finished_ = true;
  } else if (t_ % params_.batch_size == 0) {
    ++batch_;
    ++t_;
    retarget();
    return incurred;
  }
  ++t_;
  return incurred;
}

BatchFtplRun run_batch_ftpl(const BatchFtplParams& params, const LtiSystem& system,
                            const ControllerBank& bank, const InputBall& ball,
                            const CostSequence& costs, const std::vector<VectorXd>& disturbances,
                            const VectorXd& x1) {
  if (costs.horizon() != params.horizon || static_cast<int>(disturbances.size()) != params.horizon) {
    throw ConfigurationError("run_batch_ftpl: cost and disturbance sequences must have length T");
  }
  const auto start = Clock::now();
  BatchFtpl ftpl(params, system, bank, ball, x1);

  BatchFtplRun run;
  auto& trace = run.trace;
  trace.algorithm = "batchftpl";
  trace.states.reserve(params.horizon + 1);
  trace.states.push_back(x1);
  if (params.disturbance_mode) {
    run.nominal.push_back(ftpl.split().nominal);
    run.disturbance_driven.push_back(ftpl.split().disturbance_driven);
  }

  for (int t = 1; t <= params.horizon; ++t) {
    const VectorXd& x = trace.states.back();
    VectorXd u = ftpl.control_input(x);
    VectorXd next = step(system, x, u, disturbances[t - 1]);
    check_finite_state(next, t + 1);
    trace.batch_index.push_back(ftpl.batch_index());
    trace.stage_costs.push_back(ftpl.observe(costs.stages[t - 1], next, disturbances[t - 1]));
    trace.inputs.push_back(std::move(u));
    trace.states.push_back(std::move(next));
    if (params.disturbance_mode) {
      run.nominal.push_back(ftpl.split().nominal);
      run.disturbance_driven.push_back(ftpl.split().disturbance_driven);
    }
  }

  run.batches = ftpl.batches();
  for (const auto& b : run.batches) trace.update_seconds.push_back(b.oracle_seconds);
  run.sigma = ftpl.perturbation().signed_sigma();
  trace.total_seconds = seconds_since(start);
  return run;
}

}  // namespace onc
