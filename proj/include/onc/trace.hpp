#pragma once

#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace onc {

/// Closed-loop record shared by every controller; one entry per step except
/// `states`, which also holds x_{T+1}.
struct RunTrace {
  std::string algorithm;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<double> stage_costs;
  std::vector<int> batch_index;
  std::vector<double> update_seconds;  // one entry per controller update
  double total_seconds = 0.0;

  int horizon() const { return static_cast<int>(stage_costs.size()); }

  double cumulative() const {
    return std::accumulate(stage_costs.begin(), stage_costs.end(), 0.0);
  }

  std::vector<double> cumulative_curve() const {
    std::vector<double> out(stage_costs.size());
    std::partial_sum(stage_costs.begin(), stage_costs.end(), out.begin());
    return out;
  }
};

}  // namespace onc
