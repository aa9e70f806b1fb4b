#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace onc {

// Row-major nested arrays for matrices, flat arrays for vectors.
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const std::vector<Eigen::VectorXd>& vs);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace onc
