#pragma once

#include <functional>
#include <memory>

#include "onc/costs.hpp"
#include "onc/rng.hpp"

namespace onc::testing {

inline std::shared_ptr<QuadraticCost> random_quadratic(CounterRng& rng, Eigen::Index n, double center = 5.0) {
  const MatrixXd d = rng.uniform_matrix(n, n, -1.0, 1.0);
  MatrixXd q = d.transpose() * d + 0.1 * MatrixXd::Identity(n, n);
  q = (0.5 * (q + q.transpose())).eval();
  return std::make_shared<QuadraticCost>(q, rng.uniform_vector(n, -center, center));
}

inline VectorXd finite_difference(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                                  double h = 1e-5) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

inline double rel_diff(const VectorXd& a, const VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

inline MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace onc::testing
