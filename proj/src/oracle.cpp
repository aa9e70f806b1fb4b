#include "onc/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "onc/errors.hpp"

namespace onc {

OracleConfig OracleConfig::for_epsilon(double epsilon, const InputBall& ball,
                                       int max_inner_iterations) {
  OracleConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_inner_iterations = max_inner_iterations;
  cfg.inner_tolerance = epsilon / (4.0 * ball.radius());
  return cfg;
}

void OracleConfig::validate(const InputBall& ball) const {
  if (!(epsilon > 0.0)) throw ConfigurationError("oracle: epsilon must be positive");
  if (max_inner_iterations < 1) throw ConfigurationError("oracle: max_inner_iterations must be >= 1");
  if (!(inner_tolerance > 0.0)) throw ConfigurationError("oracle: inner_tolerance must be positive");
  if (inner_tolerance * 4.0 * ball.radius() > epsilon * (1.0 + 1e-12)) {
    throw ConfigurationError("oracle: inner_tolerance too loose for epsilon (needs <= eps / 4U)");
  }
}

double pulled_value(const StageCost& objective, const SliceMap& slice, const VectorXd& v) {
  return objective.eval(slice.map * v);
}

VectorXd pulled_gradient(const StageCost& objective, const SliceMap& slice, const VectorXd& v) {
  return slice.map.transpose() * objective.gradient(slice.map * v);
}

QuadraticForm pull_back(const QuadraticForm& form, const SliceMap& slice) {
  const MatrixXd& s = slice.map;
  return QuadraticForm{s.transpose() * form.weight * s, s.transpose() * form.linear, form.constant};
}

namespace {

void require_finite(double value, const char* where) {
  if (!std::isfinite(value)) throw NumericalError(std::string("slice_min: non-finite ") + where);
}

VectorXd initial_offset(const InputBall& ball, Eigen::Index m, const VectorXd* warm_start) {
  if (warm_start != nullptr && warm_start->size() == m) return ball.project(*warm_start);
  return VectorXd::Zero(m);
}

SliceResult solve_quadratic(const QuadraticForm& form, const SliceMap& slice,
                            const InputBall& ball, const OracleConfig& cfg,
                            const VectorXd* warm_start) {
  const MatrixXd& s = slice.map;
  const QuadraticForm offset_form = pull_back(form, slice);
  const MatrixXd& pulled = offset_form.weight;
  const VectorXd& pulled_linear = offset_form.linear;
  const auto m = s.cols();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (pulled + pulled.transpose()),
                                              Eigen::EigenvaluesOnly);
  const double smoothness = 2.0 * eig.eigenvalues().cwiseAbs().maxCoeff();
  require_finite(smoothness, "smoothness constant");

  SliceResult out;
  const double linear_norm = pulled_linear.norm();
  if (smoothness <= 1e-14 * std::max(1.0, linear_norm)) {
    // Linear on the ball. Below the stopping tolerance the start already
    // qualifies; otherwise the minimizer sits on the sphere opposite the gradient.
    if (linear_norm <= cfg.inner_tolerance) {
      out.offset = initial_offset(ball, m, warm_start);
    } else {
      out.offset = -ball.radius() / linear_norm * pulled_linear;
    }
    out.iterations = 1;
  } else {
    VectorXd v = initial_offset(ball, m, warm_start);
    const double step = 1.0 / smoothness;
    bool converged = false;
    int it = 0;
    while (it < cfg.max_inner_iterations) {
      ++it;
      const VectorXd grad = 2.0 * (pulled * v) + pulled_linear;
      VectorXd next = ball.project(v - step * grad);
      const double mapping_norm = smoothness * (v - next).norm();
      require_finite(mapping_norm, "gradient");
      v = std::move(next);
      if (mapping_norm <= cfg.inner_tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw OracleAccuracyError("slice_min: tolerance not reached in " +
                                    std::to_string(cfg.max_inner_iterations) + " iterations",
                                -1);
    }
    out.offset = std::move(v);
    out.iterations = it;
  }
  out.point = s * out.offset;
  out.value = form.eval(out.point);
  require_finite(out.value, "objective");
  return out;
}

SliceResult solve_general(const StageCost& objective, const SliceMap& slice,
                          const InputBall& ball, const OracleConfig& cfg,
                          const VectorXd* warm_start) {
  const MatrixXd& s = slice.map;
  auto value_at = [&](const VectorXd& v) {
    const double f = pulled_value(objective, slice, v);
    require_finite(f, "objective");
    return f;
  };

  VectorXd v = initial_offset(ball, s.cols(), warm_start);
  double fv = value_at(v);
  double smoothness = 1.0;
  int it = 0;
  bool converged = false;
  while (it < cfg.max_inner_iterations) {
    ++it;
    const VectorXd grad = pulled_gradient(objective, slice, v);
    require_finite(grad.norm(), "gradient");
    VectorXd next;
    double fnext = 0.0;
    // Backtrack until the quadratic upper model holds at the projected point.
    for (int bt = 0; bt < 200; ++bt) {
      next = ball.project(v - grad / smoothness);
      fnext = value_at(next);
      const VectorXd d = next - v;
      if (fnext <= fv + grad.dot(d) + 0.5 * smoothness * d.squaredNorm() + 1e-14 * std::abs(fv)) {
        break;
      }
      smoothness *= 2.0;
    }
    const double mapping_norm = smoothness * (v - next).norm();
    v = std::move(next);
    fv = fnext;
    if (mapping_norm <= cfg.inner_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw OracleAccuracyError("slice_min: tolerance not reached in " +
                                  std::to_string(cfg.max_inner_iterations) + " iterations",
                              -1);
  }
  SliceResult out;
  out.offset = std::move(v);
  out.point = s * out.offset;
  out.value = objective.eval(out.point);
  out.iterations = it;
  return out;
}

}  // namespace

SliceResult slice_min(const StageCost& objective, const SliceMap& slice, const InputBall& ball,
                      const OracleConfig& cfg, const VectorXd* warm_start) {
  cfg.validate(ball);
  if (objective.dim() != slice.map.rows()) {
    throw ConfigurationError("slice_min: objective dimension does not match the state dimension");
  }
  if (auto form = objective.quadratic_form()) {
    return solve_quadratic(*form, slice, ball, cfg, warm_start);
  }
  return solve_general(objective, slice, ball, cfg, warm_start);
}

SliceResult slice_min(const StageCost& objective, const LtiSystem& system,
                      const StabilityCertificate& cert, const InputBall& ball,
                      const OracleConfig& cfg) {
  return slice_min(objective, ball_parametrization(system, cert), ball, cfg);
}

BankOracle::BankOracle(const LtiSystem& system, const ControllerBank& bank, InputBall ball,
                       OracleConfig cfg)
    : system_(system), bank_(bank), ball_(ball), cfg_(cfg) {
  if (bank_.certificates.empty()) throw ConfigurationError("oracle: empty controller bank");
  cfg_.validate(ball_);
  slices_.reserve(bank_.size());
  for (const auto& cert : bank_.certificates) slices_.push_back(ball_parametrization(system_, cert));
  warm_.resize(bank_.size());
}

OracleResult BankOracle::minimize(const StageCost& objective) {
  // Converting once avoids re-summing accumulated objectives per slice.
  std::optional<QuadraticObjective> quadratic;
  if (auto form = objective.quadratic_form()) quadratic.emplace(std::move(*form));
  const StageCost& effective = quadratic ? static_cast<const StageCost&>(*quadratic) : objective;

  int best = -1;
  SliceResult best_result;
  int total_iterations = 0;
  for (std::size_t k = 0; k < slices_.size(); ++k) {
    SliceResult r;
    try {
      r = slice_min(effective, slices_[k], ball_, cfg_, warm_[k] ? &*warm_[k] : nullptr);
    } catch (const OracleAccuracyError& e) {
      throw OracleAccuracyError(std::string(e.what()) + " on slice " + std::to_string(k),
                                static_cast<int>(k));
    }
    total_iterations += r.iterations;
    warm_[k] = r.offset;
    if (best < 0 || r.value < best_result.value) {
      best = static_cast<int>(k);
      best_result = std::move(r);
    }
  }

  OracleResult out;
  out.bank_index = best;
  out.inner_iterations = total_iterations;
  AffinePolicy policy{bank_.certificates[best], best_result.offset};
  out.target = steady_state_of(system_, policy);
  out.value = objective.eval(out.target.point);
  return out;
}

OracleResult approx_min(const StageCost& objective, const LtiSystem& system,
                        const ControllerBank& bank, const InputBall& ball, const OracleConfig& cfg) {
  BankOracle oracle(system, bank, ball, cfg);
  return oracle.minimize(objective);
}

}  // namespace onc
