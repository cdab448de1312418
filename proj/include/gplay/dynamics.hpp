#pragma once

// Distributed gradient play on the estimation matrix.
//
// Row i of the estimation matrix is player i's estimate of the joint action;
// entry (i, i) is player i's own action. One step is
//
//   x^{t+1} = W x^t - alpha Diag(grad_1 J_1(x_(1)), ..., grad_n J_n(x_(n)))
//
// i.e. every entry is mixed with the neighbors' estimates and only the own
// action additionally takes a local gradient step.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gplay/game.hpp"
#include "gplay/network.hpp"

namespace gplay {

class EstimationMatrix {
 public:
  explicit EstimationMatrix(Eigen::MatrixXd values);

  // Every row equal to `row`.
  static EstimationMatrix consensual(const Eigen::VectorXd& row);

  Eigen::Index size() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }
  double own_action(Eigen::Index i) const { return values_(i, i); }
  Eigen::VectorXd estimate(Eigen::Index i) const { return values_.row(i).transpose(); }
  Eigen::VectorXd actions() const { return values_.diagonal(); }

 private:
  Eigen::MatrixXd values_;
};

enum class InitKind {
  kUniform,        // every entry U[-1, 1]
  kZero,           // all zeros
  kSelfKnowledge,  // own action U[-1, 1], estimates of others 0
};

std::string to_string(InitKind k);
InitKind init_kind_from_string(const std::string& name);
EstimationMatrix initial_estimates(InitKind kind, Eigen::Index n, std::uint64_t seed);

// grad_i J_i evaluated at player i's own estimate vector (zero-based i).
using LocalGradientFn =
    std::function<double(Eigen::Index, const Eigen::Ref<const Eigen::VectorXd>&)>;

// Diagonal of the diagonal gradient matrix: component i is
// grad_i J_i(row i of x).
Eigen::VectorXd diag_gradient(const QuadraticGame& game, const EstimationMatrix& x);
Eigen::VectorXd diag_gradient(const LocalGradientFn& grad, const EstimationMatrix& x);

// One gradient-play iteration. Throws InputError for alpha <= 0 or mismatched
// dimensions.
EstimationMatrix step(const EstimationMatrix& x, const MixingMatrix& w, double alpha,
                      const QuadraticGame& game);
EstimationMatrix step(const EstimationMatrix& x, const MixingMatrix& w, double alpha,
                      const LocalGradientFn& grad);

// Column means: the running average of the players' estimates.
Eigen::VectorXd running_average(const EstimationMatrix& x);

// Per-iteration record. Slacks are rhs - lhs of the corresponding
// inequality; Lemma 1 and 3 and the Z comparison describe the transition
// t -> t+1. Norms are Frobenius norms of n x n matrices; xbar denotes the
// consensual matrix of running averages and x* the consensual equilibrium.
struct IterationTrace {
  long t = 0;
  double consensus_violation = 0.0;  // ||x^t - xbar^t||
  double distance_to_ne = 0.0;       // ||x^t - x*||
  double avg_distance_to_ne = 0.0;   // ||xbar^t - x*||
  double grad_norm = 0.0;            // ||diag gradient||

  // ||x^{t+1} - xbar^{t+1}|| <= sigma ||x^t - xbar^t|| + alpha sqrt((n-1)/n) grad_norm
  double lemma1_slack = 0.0;
  double lemma1_rhs = 0.0;
  // grad_norm <= L ||x^t - x*||
  double lemma2_slack = 0.0;
  double lemma2_rhs = 0.0;
  // (1 + 2 alpha/n (mu - theta/2)) ||xbar^{t+1} - x*||^2
  //     <= ||xbar^t - x*||^2 + L^2 alpha / theta ||x^t - xbar^t||^2
  double lemma3_slack = 0.0;
  double lemma3_rhs = 0.0;
  // (Z z^t) - z^{t+1}, componentwise. NaN when sigma is 0.
  double z_slack_avg = 0.0;
  double z_rhs_avg = 0.0;
  double z_slack_consensus = 0.0;
  double z_rhs_consensus = 0.0;
  // max_j |xbar^{t+1}_j - (xbar^t_j - alpha/n grad_j)|
  double recursion_residual = 0.0;
  double recursion_scale = 0.0;      // 1 + max_j |xbar^t_j|
};

// Slack normalised by 1 + |rhs|; NaN stays NaN.
inline double relative_slack(double slack, double rhs) { return slack / (1.0 + std::abs(rhs)); }

struct RunOptions {
  long max_iters = 1000;
  double tol = 0.0;             // stop once ||x^t - x*|| <= tol
  bool record = true;
  double theta = -1.0;          // Lemma-3 parameter; negative means mu
  double divergence_factor = 1e12;
};

struct RunResult {
  EstimationMatrix final_state;
  std::vector<IterationTrace> trace;
  Eigen::VectorXd equilibrium;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Iterates step() until the distance to the equilibrium is <= tol or
// max_iters steps were taken. Slacks use the exact mu and L of the game and
// sigma of w. Throws DivergenceError when the distance exceeds
// divergence_factor times its initial value.
RunResult run(const QuadraticGame& game, const MixingMatrix& w, double alpha,
              const EstimationMatrix& x0, const RunOptions& options = {});

// Header t,consensus_violation,distance_to_ne,avg_distance_to_ne,grad_norm,
// lemma1_slack,lemma2_slack,lemma3_slack; shortest round-trip decimals.
std::string trace_to_csv(const std::vector<IterationTrace>& trace);

}  // namespace gplay
