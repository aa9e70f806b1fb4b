#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace onc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// States whose coordinates exceed this magnitude are reported as divergent.
inline constexpr double kDivergenceBound = 1e12;

/**
 * Known discrete-time LTI plant  x_{t+1} = A x_t + B u_t + w_t.
 *
 * Immutable after construction; the constructor rejects inconsistent
 * dimensions and non-finite entries.
 */
class LtiSystem {
 public:
  LtiSystem(MatrixXd a, MatrixXd b);

  const MatrixXd& a() const { return a_; }
  const MatrixXd& b() const { return b_; }
  Eigen::Index state_dim() const { return a_.rows(); }
  Eigen::Index input_dim() const { return b_.cols(); }

  /// Closed-loop matrix A - B K.
  MatrixXd closed_loop(const MatrixXd& gain) const;

 private:
  MatrixXd a_;
  MatrixXd b_;
};

/// The 3-state, 2-input plant used in the simulation study.
LtiSystem study_system();

struct Trajectory {
  std::vector<VectorXd> states;        // T + 1 entries
  std::vector<VectorXd> inputs;        // T entries
  std::vector<VectorXd> disturbances;  // T entries

  int horizon() const { return static_cast<int>(inputs.size()); }
};

/// Superposition split x = nominal + disturbance_driven.
struct SplitState {
  VectorXd nominal;
  VectorXd disturbance_driven;

  VectorXd physical() const { return nominal + disturbance_driven; }
};

VectorXd step(const LtiSystem& system, const VectorXd& x, const VectorXd& u, const VectorXd& w);

/// Advances both components of the split: the nominal part sees only
/// nominal_input, the disturbance-driven part sees disturbance_input and w.
SplitState step_split(const LtiSystem& system, const SplitState& split,
                      const VectorXd& nominal_input, const VectorXd& disturbance_input,
                      const VectorXd& w);

/// Input rule: (t, x_t) -> u_t with t starting at 1.
using Policy = std::function<VectorXd(int, const VectorXd&)>;

/// Rolls the plant forward for disturbances.size() steps. Throws
/// DivergenceError (carrying the step index) on non-finite or runaway states.
Trajectory simulate(const LtiSystem& system, const VectorXd& x1, const Policy& policy,
                    const std::vector<VectorXd>& disturbances);

/// Throws DivergenceError if x has a non-finite coordinate or one beyond
/// kDivergenceBound.
void check_finite_state(const VectorXd& x, int step);

}  // namespace onc
