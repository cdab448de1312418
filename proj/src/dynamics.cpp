#include "gplay/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gplay/error.hpp"
#include "gplay/format.hpp"
#include "gplay/random.hpp"
#include "gplay/theory.hpp"

namespace gplay {

EstimationMatrix::EstimationMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() == 0) {
    throw InputError("estimation matrix must be square and non-empty");
  }
}

EstimationMatrix EstimationMatrix::consensual(const Eigen::VectorXd& row) {
  return EstimationMatrix(Eigen::VectorXd::Ones(row.size()) * row.transpose());
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::kUniform: return "uniform";
    case InitKind::kZero: return "zero";
    case InitKind::kSelfKnowledge: return "self-knowledge";
  }
  return "unknown";
}

InitKind init_kind_from_string(const std::string& name) {
  if (name == "uniform") return InitKind::kUniform;
  if (name == "zero") return InitKind::kZero;
  if (name == "self-knowledge") return InitKind::kSelfKnowledge;
  throw InputError("unknown initializer '" + name + "' (expected uniform, zero or self-knowledge)");
}

EstimationMatrix initial_estimates(InitKind kind, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InputError("initial_estimates: n must be positive");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  Rng rng(seed);
  switch (kind) {
    case InitKind::kUniform:
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
      break;
    case InitKind::kZero:
      break;
    case InitKind::kSelfKnowledge:
      for (Eigen::Index i = 0; i < n; ++i) x(i, i) = rng.uniform(-1.0, 1.0);
      break;
  }
  return EstimationMatrix(std::move(x));
}

Eigen::VectorXd diag_gradient(const QuadraticGame& game, const EstimationMatrix& x) {
  if (x.size() != game.size()) throw InputError("diag_gradient: dimension mismatch");
  // grad_i = sum_j A_ij x_(i)j + b_i
  return (game.mapping_matrix().cwiseProduct(x.values())).rowwise().sum() + game.b();
}

Eigen::VectorXd diag_gradient(const LocalGradientFn& grad, const EstimationMatrix& x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g(i) = grad(i, x.values().row(i).transpose());
  return g;
}

namespace {

EstimationMatrix apply_step(const EstimationMatrix& x, const MixingMatrix& w, double alpha,
                            const Eigen::VectorXd& grad) {
  if (!(alpha > 0.0)) throw InputError("step: alpha must be positive");
  if (w.size() != x.size()) throw InputError("step: mixing matrix and estimates disagree in size");
  Eigen::MatrixXd next = w.w * x.values();
  next.diagonal() -= alpha * grad;
  return EstimationMatrix(std::move(next));
}

// Quantities of one iterate shared between consecutive trace rows.
struct Snapshot {
  Eigen::VectorXd avg;
  Eigen::VectorXd grad;
  double consensus_sq = 0.0;
  double avg_sq = 0.0;
  double dist_sq = 0.0;
};

Snapshot snapshot(const QuadraticGame& game, const EstimationMatrix& x,
                  const Eigen::VectorXd& xstar) {
  const auto n = static_cast<double>(x.size());
  Snapshot s;
  s.avg = running_average(x);
  s.grad = diag_gradient(game, x);
  s.consensus_sq = (x.values().rowwise() - s.avg.transpose()).squaredNorm();
  s.avg_sq = n * (s.avg - xstar).squaredNorm();
  s.dist_sq = (x.values().rowwise() - xstar.transpose()).squaredNorm();
  return s;
}

}  // namespace

EstimationMatrix step(const EstimationMatrix& x, const MixingMatrix& w, double alpha,
                      const QuadraticGame& game) {
  return apply_step(x, w, alpha, diag_gradient(game, x));
}

EstimationMatrix step(const EstimationMatrix& x, const MixingMatrix& w, double alpha,
                      const LocalGradientFn& grad) {
  return apply_step(x, w, alpha, diag_gradient(grad, x));
}

Eigen::VectorXd running_average(const EstimationMatrix& x) {
  return x.values().colwise().mean().transpose();
}

RunResult run(const QuadraticGame& game, const MixingMatrix& w, double alpha,
              const EstimationMatrix& x0, const RunOptions& options) {
  if (!(alpha > 0.0)) throw InputError("run: alpha must be positive");
  if (!(options.tol >= 0.0)) throw InputError("run: tol must be nonnegative");
  if (x0.size() != game.size() || w.size() != game.size()) {
    throw InputError("run: game, mixing matrix and initial estimates disagree in size");
  }

  const GameConstants k = estimate_constants(game);
  const Eigen::VectorXd xstar = solve_nash_equilibrium(game);
  const Eigen::Index n = game.size();
  const auto nd = static_cast<double>(n);
  const double theta = options.theta > 0.0 ? options.theta : k.mu;
  const double sigma = w.sigma;
  const bool z_defined = sigma >= kPerfectMixingSigma && sigma < 1.0;
  const Eigen::Matrix2d z =
      z_defined ? detail::z_matrix_unchecked(k.mu, k.l, sigma, static_cast<long>(n), alpha)
                : Eigen::Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
  const double consensus_gain = alpha * std::sqrt((nd - 1.0) / nd);
  const double lemma3_lhs_factor = 1.0 + 2.0 * alpha / nd * (k.mu - 0.5 * theta);
  const double lemma3_cons_factor = k.l * k.l * alpha / theta;

  RunResult result{x0, {}, xstar, 0.0, 0.0, 0, false};
  EstimationMatrix x = x0;
  Snapshot now = snapshot(game, x, xstar);
  result.initial_distance = std::sqrt(now.dist_sq);
  const double guard = options.divergence_factor * std::max(result.initial_distance, 1e-300);

  for (long t = 0;; ++t) {
    const double dist = std::sqrt(now.dist_sq);
    const bool converged = dist <= options.tol;
    const bool done = converged || t >= options.max_iters;
    if (done && !options.record) {
      result.converged = converged;
      result.iterations = t;
      break;
    }

    EstimationMatrix next = apply_step(x, w, alpha, now.grad);
    Snapshot after = snapshot(game, next, xstar);

    if (options.record) {
      IterationTrace row;
      row.t = t;
      row.consensus_violation = std::sqrt(now.consensus_sq);
      row.distance_to_ne = dist;
      row.avg_distance_to_ne = std::sqrt(now.avg_sq);
      row.grad_norm = now.grad.norm();

      row.lemma1_rhs = sigma * row.consensus_violation + consensus_gain * row.grad_norm;
      row.lemma1_slack = row.lemma1_rhs - std::sqrt(after.consensus_sq);

      row.lemma2_rhs = k.l * dist;
      row.lemma2_slack = row.lemma2_rhs - row.grad_norm;

      row.lemma3_rhs = now.avg_sq + lemma3_cons_factor * now.consensus_sq;
      row.lemma3_slack = row.lemma3_rhs - lemma3_lhs_factor * after.avg_sq;

      row.z_rhs_avg = z(0, 0) * now.avg_sq + z(0, 1) * now.consensus_sq;
      row.z_slack_avg = row.z_rhs_avg - after.avg_sq;
      row.z_rhs_consensus = z(1, 0) * now.avg_sq + z(1, 1) * now.consensus_sq;
      row.z_slack_consensus = row.z_rhs_consensus - after.consensus_sq;

      const Eigen::VectorXd predicted = now.avg - (alpha / nd) * now.grad;
      row.recursion_residual = (after.avg - predicted).cwiseAbs().maxCoeff();
      row.recursion_scale = 1.0 + now.avg.cwiseAbs().maxCoeff();
      result.trace.push_back(row);
    }

    if (done) {
      result.converged = converged;
      result.iterations = t;
      break;
    }
    x = std::move(next);
    now = std::move(after);
    if (!std::isfinite(now.dist_sq) || std::sqrt(now.dist_sq) > guard) {
      throw DivergenceError("diverged at iteration " + std::to_string(t + 1) +
                                ": distance to equilibrium exceeded " +
                                format_double(options.divergence_factor) +
                                " x initial; alpha is too large",
                            t + 1);
    }
  }
  result.final_distance = std::sqrt(now.dist_sq);
  result.final_state = std::move(x);
  return result;
}

std::string trace_to_csv(const std::vector<IterationTrace>& trace) {
  std::string out =
      "t,consensus_violation,distance_to_ne,avg_distance_to_ne,grad_norm,"
      "lemma1_slack,lemma2_slack,lemma3_slack\n";
  for (const auto& r : trace) {
    out += std::to_string(r.t);
    for (double v : {r.consensus_violation, r.distance_to_ne, r.avg_distance_to_ne, r.grad_norm,
                     r.lemma1_slack, r.lemma2_slack, r.lemma3_slack}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace gplay
