#include "onc/costs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "onc/errors.hpp"
#include "onc/json_eigen.hpp"

namespace onc {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw ConfigurationError(std::string(what) + ": expected dimension " + std::to_string(want) +
                             ", got " + std::to_string(got));
  }
}

}  // namespace

QuadraticForm QuadraticForm::zero(Eigen::Index n) {
  return QuadraticForm{MatrixXd::Zero(n, n), VectorXd::Zero(n), 0.0};
}

QuadraticForm& QuadraticForm::operator+=(const QuadraticForm& other) {
  require_dim(other.linear.size(), linear.size(), "QuadraticForm +=");
  weight += other.weight;
  linear += other.linear;
  constant += other.constant;
  return *this;
}

QuadraticCost::QuadraticCost(MatrixXd weight, VectorXd center)
    : weight_(std::move(weight)), center_(std::move(center)) {
  if (weight_.rows() != weight_.cols() || weight_.rows() != center_.size() || center_.size() == 0) {
    throw ConfigurationError("QuadraticCost: weight must be square and match the center");
  }
  if (!weight_.allFinite() || !center_.allFinite()) {
    throw ConfigurationError("QuadraticCost: entries must be finite");
  }
  const double scale = std::max(1.0, weight_.cwiseAbs().maxCoeff());
  if ((weight_ - weight_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigurationError("QuadraticCost: weight must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(weight_, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ConfigurationError("QuadraticCost: weight must be positive definite");
  }
}

double QuadraticCost::eval(const VectorXd& x) const {
  require_dim(x.size(), dim(), "QuadraticCost::eval");
  const VectorXd d = x - center_;
  return d.dot(weight_ * d);
}

VectorXd QuadraticCost::gradient(const VectorXd& x) const {
  require_dim(x.size(), dim(), "QuadraticCost::gradient");
  return 2.0 * (weight_ * (x - center_));
}

std::optional<QuadraticForm> QuadraticCost::quadratic_form() const {
  const VectorXd qc = weight_ * center_;
  return QuadraticForm{weight_, -2.0 * qc, center_.dot(qc)};
}

FunctionCost::FunctionCost(Eigen::Index dim, EvalFn eval, GradFn gradient)
    : dim_(dim), eval_(std::move(eval)), gradient_(std::move(gradient)) {
  if (dim_ < 1 || !eval_) throw ConfigurationError("FunctionCost: needs a dimension and an evaluator");
}

double FunctionCost::eval(const VectorXd& x) const {
  require_dim(x.size(), dim_, "FunctionCost::eval");
  return eval_(x);
}

VectorXd FunctionCost::gradient(const VectorXd& x) const {
  require_dim(x.size(), dim_, "FunctionCost::gradient");
  if (gradient_) return gradient_(x);
  constexpr double h = 1e-6;
  VectorXd g(dim_);
  VectorXd probe = x;
  for (Eigen::Index i = 0; i < dim_; ++i) {
    probe(i) = x(i) + h;
    const double up = eval_(probe);
    probe(i) = x(i) - h;
    const double down = eval_(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

TranslatedCost::TranslatedCost(CostHandle base, VectorXd shift)
    : base_(std::move(base)), shift_(std::move(shift)) {
  if (!base_) throw ConfigurationError("TranslatedCost: null base cost");
  require_dim(shift_.size(), base_->dim(), "TranslatedCost shift");
}

double TranslatedCost::eval(const VectorXd& x) const { return base_->eval(x + shift_); }

VectorXd TranslatedCost::gradient(const VectorXd& x) const { return base_->gradient(x + shift_); }

std::optional<QuadraticForm> TranslatedCost::quadratic_form() const {
  auto form = base_->quadratic_form();
  if (!form) return std::nullopt;
  // f(x + s) = x^T W x + (2 W s + g)^T x + f(s)
  const VectorXd ws = form->weight * shift_;
  const double at_shift = shift_.dot(ws) + form->linear.dot(shift_) + form->constant;
  form->linear += 2.0 * ws;
  form->constant = at_shift;
  return form;
}

SumCost::SumCost(std::vector<CostHandle> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ConfigurationError("SumCost: empty batch");
  for (const auto& t : terms_) {
    if (!t) throw ConfigurationError("SumCost: null term");
    require_dim(t->dim(), terms_.front()->dim(), "SumCost term");
  }
}

double SumCost::eval(const VectorXd& x) const {
  double total = 0.0;
  for (const auto& t : terms_) total += t->eval(x);
  return total;
}

VectorXd SumCost::gradient(const VectorXd& x) const {
  VectorXd g = VectorXd::Zero(dim());
  for (const auto& t : terms_) g += t->gradient(x);
  return g;
}

std::optional<QuadraticForm> SumCost::quadratic_form() const {
  QuadraticForm total = QuadraticForm::zero(dim());
  for (const auto& t : terms_) {
    auto form = t->quadratic_form();
    if (!form) return std::nullopt;
    total += *form;
  }
  return total;
}

PerturbationTerm::PerturbationTerm(VectorXd sigma, SignMode mode, VectorXd signs)
    : sigma_(std::move(sigma)), mode_(mode) {
  if (!sigma_.allFinite()) throw ConfigurationError("PerturbationTerm: sigma must be finite");
  if (mode_ == SignMode::kLiteral) {
    if (sigma_.size() > 0 && sigma_.minCoeff() < 0.0) {
      throw ConfigurationError("PerturbationTerm: literal mode needs nonnegative sigma");
    }
    signed_sigma_ = sigma_;
  } else {
    require_dim(signs.size(), sigma_.size(), "PerturbationTerm signs");
    signed_sigma_ = sigma_.cwiseProduct(signs);
  }
}

PerturbationTerm PerturbationTerm::sample(Eigen::Index dim, double eta, SignMode mode,
                                          CounterRng& rng) {
  if (!(eta > 0.0)) throw ConfigurationError("PerturbationTerm: eta must be positive");
  VectorXd sigma(dim);
  for (Eigen::Index i = 0; i < dim; ++i) sigma(i) = rng.exponential(eta);
  VectorXd signs = VectorXd::Ones(dim);
  if (mode == SignMode::kRandomSign) {
    for (Eigen::Index i = 0; i < dim; ++i) signs(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  return PerturbationTerm(std::move(sigma), mode, std::move(signs));
}

PerturbationTerm PerturbationTerm::literal(VectorXd sigma) {
  VectorXd signs = VectorXd::Ones(sigma.size());
  return PerturbationTerm(std::move(sigma), SignMode::kLiteral, std::move(signs));
}

std::optional<QuadraticForm> PerturbationTerm::quadratic_form() const {
  QuadraticForm form = QuadraticForm::zero(dim());
  form.linear = signed_sigma_;
  return form;
}

CostHandle batch_cost(const CostSequence& costs, int batch_index, int batch_size) {
  if (batch_index < 1 || batch_size < 1) {
    throw ConfigurationError("batch_cost: batch index and size must be positive");
  }
  const long first = static_cast<long>(batch_index - 1) * batch_size;
  const long last = std::min<long>(first + batch_size, costs.horizon());
  if (first >= last) throw ConfigurationError("batch_cost: empty batch");
  std::vector<CostHandle> terms(costs.stages.begin() + first, costs.stages.begin() + last);
  if (terms.size() == 1) return terms.front();
  return std::make_shared<SumCost>(std::move(terms));
}

double quadratic_lipschitz_scale(const std::vector<CostHandle>& stages, double domain_radius) {
  if (!(domain_radius > 0.0)) throw ConfigurationError("domain radius must be positive");
  double scale = 0.0;
  for (const auto& stage : stages) {
    const auto* quad = dynamic_cast<const QuadraticCost*>(stage.get());
    if (quad == nullptr) {
      throw ConfigurationError("quadratic_lipschitz_scale: non-quadratic stage; supply L explicitly");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(quad->weight(), Eigen::EigenvaluesOnly);
    const double norm_q = eig.eigenvalues().cwiseAbs().maxCoeff();
    scale = std::max(scale, 2.0 * norm_q * (domain_radius + quad->center().norm()) / domain_radius);
  }
  return scale;
}

bool gradient_bound_holds(const CostSequence& costs, int samples, CounterRng& rng) {
  const double bound = costs.lipschitz_scale * costs.domain_radius;
  for (const auto& stage : costs.stages) {
    for (int s = 0; s < samples; ++s) {
      VectorXd x = rng.uniform_vector(stage->dim(), -1.0, 1.0);
      if (x.norm() > 0.0) x *= costs.domain_radius * rng.uniform() / x.norm();
      if (stage->gradient(x).norm() > bound * (1.0 + 1e-12)) return false;
    }
  }
  return true;
}

nlohmann::json costs_to_json(const CostSequence& costs) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& stage : costs.stages) {
    const auto* quad = dynamic_cast<const QuadraticCost*>(stage.get());
    if (quad == nullptr) throw ConfigurationError("costs_to_json: only quadratic stages serialize");
    stages.push_back({{"weight", to_json(quad->weight())}, {"center", to_json(quad->center())}});
  }
  return {{"lipschitz_scale", costs.lipschitz_scale},
          {"domain_radius", costs.domain_radius},
          {"stages", std::move(stages)}};
}

CostSequence costs_from_json(const nlohmann::json& doc) {
  CostSequence costs;
  try {
    costs.lipschitz_scale = doc.at("lipschitz_scale").get<double>();
    costs.domain_radius = doc.at("domain_radius").get<double>();
    for (const auto& s : doc.at("stages")) {
      costs.stages.push_back(std::make_shared<QuadraticCost>(matrix_from_json(s.at("weight")),
                                                             vector_from_json(s.at("center"))));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("costs_from_json: ") + e.what());
  }
  return costs;
}

}  // namespace onc
