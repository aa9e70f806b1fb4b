#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "onc/rng.hpp"

namespace onc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// f(z) = z^T W z + g^T z + c0. Sums of quadratic stage costs and the linear
/// perturbation all collapse to this form, which the oracle exploits.
struct QuadraticForm {
  MatrixXd weight;
  VectorXd linear;
  double constant = 0.0;

  static QuadraticForm zero(Eigen::Index n);

  double eval(const VectorXd& z) const { return z.dot(weight * z) + linear.dot(z) + constant; }
  VectorXd gradient(const VectorXd& z) const { return 2.0 * (weight * z) + linear; }

  QuadraticForm& operator+=(const QuadraticForm& other);
};

/// A differentiable state cost. Handles are shared read-only.
class StageCost {
 public:
  virtual ~StageCost() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double eval(const VectorXd& x) const = 0;
  virtual VectorXd gradient(const VectorXd& x) const = 0;
  /// Exact quadratic representation when one exists.
  virtual std::optional<QuadraticForm> quadratic_form() const { return std::nullopt; }
};

using CostHandle = std::shared_ptr<const StageCost>;

/// (x - c)^T Q (x - c) with Q symmetric positive definite.
class QuadraticCost final : public StageCost {
 public:
  QuadraticCost(MatrixXd weight, VectorXd center);

  Eigen::Index dim() const override { return center_.size(); }
  double eval(const VectorXd& x) const override;
  VectorXd gradient(const VectorXd& x) const override;
  std::optional<QuadraticForm> quadratic_form() const override;

  const MatrixXd& weight() const { return weight_; }
  const VectorXd& center() const { return center_; }

 private:
  MatrixXd weight_;
  VectorXd center_;
};

/// User-supplied cost. Without a gradient callback, central differences
/// with step 1e-6 are used.
class FunctionCost final : public StageCost {
 public:
  using EvalFn = std::function<double(const VectorXd&)>;
  using GradFn = std::function<VectorXd(const VectorXd&)>;

  FunctionCost(Eigen::Index dim, EvalFn eval, GradFn gradient = {});

  Eigen::Index dim() const override { return dim_; }
  double eval(const VectorXd& x) const override;
  VectorXd gradient(const VectorXd& x) const override;

 private:
  Eigen::Index dim_;
  EvalFn eval_;
  GradFn gradient_;
};

/// g(x) = f(x + shift).
class TranslatedCost final : public StageCost {
 public:
  TranslatedCost(CostHandle base, VectorXd shift);

  Eigen::Index dim() const override { return shift_.size(); }
  double eval(const VectorXd& x) const override;
  VectorXd gradient(const VectorXd& x) const override;
  std::optional<QuadraticForm> quadratic_form() const override;

  const VectorXd& shift() const { return shift_; }

 private:
  CostHandle base_;
  VectorXd shift_;
};

class SumCost final : public StageCost {
 public:
  explicit SumCost(std::vector<CostHandle> terms);

  Eigen::Index dim() const override { return terms_.front()->dim(); }
  double eval(const VectorXd& x) const override;
  VectorXd gradient(const VectorXd& x) const override;
  std::optional<QuadraticForm> quadratic_form() const override;

  const std::vector<CostHandle>& terms() const { return terms_; }

 private:
  std::vector<CostHandle> terms_;
};

/// A StageCost backed directly by a QuadraticForm (accumulated objectives).
class QuadraticObjective final : public StageCost {
 public:
  explicit QuadraticObjective(QuadraticForm form) : form_(std::move(form)) {}

  Eigen::Index dim() const override { return form_.linear.size(); }
  double eval(const VectorXd& x) const override { return form_.eval(x); }
  VectorXd gradient(const VectorXd& x) const override { return form_.gradient(x); }
  std::optional<QuadraticForm> quadratic_form() const override { return form_; }

  const QuadraticForm& form() const { return form_; }

 private:
  QuadraticForm form_;
};

enum class SignMode { kLiteral, kRandomSign };

/// f0(z) = <sigma_signed, z>, the random linear regularizer.
class PerturbationTerm final : public StageCost {
 public:
  PerturbationTerm(VectorXd sigma, SignMode mode, VectorXd signs);

  /// sigma_i i.i.d. exponential with rate eta (mean 1/eta); in random-sign
  /// mode each coordinate additionally gets an independent +-1 sign.
  static PerturbationTerm sample(Eigen::Index dim, double eta, SignMode mode, CounterRng& rng);
  static PerturbationTerm literal(VectorXd sigma);

  Eigen::Index dim() const override { return sigma_.size(); }
  double eval(const VectorXd& z) const override { return signed_sigma_.dot(z); }
  VectorXd gradient(const VectorXd&) const override { return signed_sigma_; }
  std::optional<QuadraticForm> quadratic_form() const override;

  const VectorXd& sigma() const { return sigma_; }
  const VectorXd& signed_sigma() const { return signed_sigma_; }
  SignMode mode() const { return mode_; }

 private:
  VectorXd sigma_;
  SignMode mode_;
  VectorXd signed_sigma_;
};

struct CostSequence {
  std::vector<CostHandle> stages;
  double lipschitz_scale = 0.0;
  double domain_radius = 0.0;

  int horizon() const { return static_cast<int>(stages.size()); }
};

/// F_n = sum of stages (n-1)H+1 .. min(nH, T) (1-based n). The final batch
/// may be short.
CostHandle batch_cost(const CostSequence& costs, int batch_index, int batch_size);

/// Smallest L with 2 ||Q_t|| (D + ||c_t||) <= L D for every quadratic stage.
double quadratic_lipschitz_scale(const std::vector<CostHandle>& stages, double domain_radius);

/// Samples `samples` points with ||x|| <= D and checks ||grad f_t(x)|| <= L D.
bool gradient_bound_holds(const CostSequence& costs, int samples, CounterRng& rng);

nlohmann::json costs_to_json(const CostSequence& costs);
CostSequence costs_from_json(const nlohmann::json& doc);

}  // namespace onc
