#include <cmath>

#include <gtest/gtest.h>

#include "gplay/dynamics.hpp"
#include "gplay/error.hpp"
#include "gplay/theory.hpp"

using namespace gplay;

namespace {

QuadraticGame identity_game(Eigen::Index n) {
  return QuadraticGame(Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n));
}

struct Setup {
  QuadraticGame game;
  MixingMatrix w;
  GameConstants k;
  double alpha;
};

Setup make_setup(Eigen::Index n, std::uint64_t seed, Topology topo = Topology::kRing) {
  auto game = random_game(n, seed, 0.3);
  auto w = metropolis_weights(make_graph(topo, n, seed));
  const auto k = estimate_constants(game);
  const double alpha = 0.9 * theorem1_terms(k.mu, k.l, w.sigma, n).alpha_max();
  return {std::move(game), std::move(w), k, alpha};
}

}  // namespace

TEST(EstimationMatrix, Accessors) {
  Eigen::MatrixXd v(2, 2);
  v << 1, 2, 3, 4;
  const EstimationMatrix x(v);
  EXPECT_EQ(x.own_action(1), 4.0);
  EXPECT_EQ(x.estimate(1), Eigen::Vector2d(3, 4));
  EXPECT_EQ(x.actions(), Eigen::Vector2d(1, 4));
  EXPECT_THROW(EstimationMatrix(Eigen::MatrixXd::Zero(2, 3)), InputError);
}

TEST(Step, FixedPointAtConsensualEquilibrium) {
  const auto s = make_setup(6, 4);
  const Eigen::VectorXd xs = solve_nash_equilibrium(s.game);
  const auto x = EstimationMatrix::consensual(xs);
  const auto next = step(x, s.w, s.alpha, s.game);
  EXPECT_LE((next.values() - x.values()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Step, TwoPlayerHandExample) {
  // W = 1/2 11^T, identity game, alpha = 0.1
  const MixingMatrix w = metropolis_weights(complete(2));
  Eigen::MatrixXd v(2, 2);
  v << 1, 0, 0, -1;
  const auto next = step(EstimationMatrix(v), w, 0.1, identity_game(2));
  // Averaged row (0.5, -0.5); player 0 gradient 1, player 1 gradient -1.
  EXPECT_NEAR(next.values()(0, 0), 0.4, 1e-15);
  EXPECT_NEAR(next.values()(0, 1), -0.5, 1e-15);
  EXPECT_NEAR(next.values()(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(next.values()(1, 1), -0.4, 1e-15);
}

TEST(Step, RejectsNonPositiveAlpha) {
  const MixingMatrix w = metropolis_weights(complete(2));
  const auto x = EstimationMatrix(Eigen::MatrixXd::Zero(2, 2));
  EXPECT_THROW(step(x, w, 0.0, identity_game(2)), InputError);
  EXPECT_THROW(step(x, w, -1.0, identity_game(2)), InputError);
}

TEST(DiagGradient, IdentityGameOnOnes) {
  const auto g = diag_gradient(identity_game(3), EstimationMatrix(Eigen::MatrixXd::Ones(3, 3)));
  EXPECT_EQ(g, Eigen::Vector3d::Ones());
}

TEST(DiagGradient, QuadraticMatchesCallback) {
  const auto game = random_game(7, 9, 0.5);
  const auto x = initial_estimates(InitKind::kUniform, 7, 1);
  LocalGradientFn cb = [&](Eigen::Index i, const Eigen::Ref<const Eigen::VectorXd>& row) {
    return local_gradient(game, i, row);
  };
  EXPECT_LE((diag_gradient(game, x) - diag_gradient(cb, x)).cwiseAbs().maxCoeff(), 1e-15);
  const MixingMatrix w = metropolis_weights(ring(7));
  EXPECT_LE((step(x, w, 0.01, game).values() - step(x, w, 0.01, cb).values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RunningAverage, AverageRecursionHolds) {
  // xbar^{t+1} = xbar^t - (alpha/n) g^t, because W is doubly stochastic.
  const auto s = make_setup(8, 2, Topology::kTree);
  auto x = initial_estimates(InitKind::kUniform, 8, 5);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd g = diag_gradient(s.game, x);
    const Eigen::VectorXd predicted = running_average(x) - (0.05 / 8.0) * g;
    x = step(x, s.w, 0.05, s.game);
    const double scale = 1.0 + running_average(x).cwiseAbs().maxCoeff();
    EXPECT_LE((running_average(x) - predicted).cwiseAbs().maxCoeff(), 1e-12 * scale);
  }
}

TEST(InitialEstimates, KindsAndDeterminism) {
  EXPECT_TRUE(initial_estimates(InitKind::kZero, 4, 1).values().isZero(0.0));
  const auto self = initial_estimates(InitKind::kSelfKnowledge, 4, 1);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      if (i != j) EXPECT_EQ(self.values()(i, j), 0.0);
  const auto u = initial_estimates(InitKind::kUniform, 4, 1);
  EXPECT_LE(u.values().cwiseAbs().maxCoeff(), 1.0);
  EXPECT_EQ(u.values(), initial_estimates(InitKind::kUniform, 4, 1).values());
  EXPECT_EQ(init_kind_from_string("self-knowledge"), InitKind::kSelfKnowledge);
  EXPECT_THROW(init_kind_from_string("gaussian"), InputError);
}

TEST(Run, StartingAtEquilibriumTerminatesImmediately) {
  const auto s = make_setup(5, 3);
  const auto x0 = EstimationMatrix::consensual(solve_nash_equilibrium(s.game));
  RunOptions opts;
  opts.tol = 1e-12;
  const auto r = run(s.game, s.w, s.alpha, x0, opts);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].t, 0);
}

TEST(Run, LemmaSlacksNonNegativeUnderTheoremStep) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto s = make_setup(6, seed);
    RunOptions opts;
    opts.max_iters = 200;
    const auto r = run(s.game, s.w, s.alpha, initial_estimates(InitKind::kUniform, 6, seed), opts);
    ASSERT_EQ(r.trace.size(), 201u);
    for (const auto& row : r.trace) {
      EXPECT_GE(relative_slack(row.lemma1_slack, row.lemma1_rhs), -1e-9) << row.t;
      EXPECT_GE(relative_slack(row.lemma2_slack, row.lemma2_rhs), -1e-9) << row.t;
      EXPECT_GE(relative_slack(row.lemma3_slack, row.lemma3_rhs), -1e-9) << row.t;
      EXPECT_GE(relative_slack(row.z_slack_avg, row.z_rhs_avg), -1e-9) << row.t;
      EXPECT_GE(relative_slack(row.z_slack_consensus, row.z_rhs_consensus), -1e-9) << row.t;
      EXPECT_LE(row.recursion_residual, 1e-12 * row.recursion_scale) << row.t;
    }
    EXPECT_LT(r.final_distance, r.initial_distance);
  }
}

TEST(Run, ConvergesWithLargerPracticalStep) {
  const auto s = make_setup(5, 8, Topology::kStar);
  RunOptions opts;
  opts.max_iters = 20000;
  opts.tol = 1e-8;
  opts.record = false;
  const auto r = run(s.game, s.w, 0.1, initial_estimates(InitKind::kUniform, 5, 2), opts);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.final_distance, 1e-8);
  EXPECT_TRUE(r.trace.empty());
}

TEST(Run, DivergenceGuard) {
  const auto s = make_setup(5, 1);
  RunOptions opts;
  opts.max_iters = 10000;
  try {
    run(s.game, s.w, 50.0, initial_estimates(InitKind::kUniform, 5, 1), opts);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.iteration(), 0);
    EXPECT_LT(e.iteration(), 10000);
  }
}

TEST(Run, DeterministicTrace) {
  const auto s = make_setup(6, 7);
  RunOptions opts;
  opts.max_iters = 50;
  const auto x0 = initial_estimates(InitKind::kUniform, 6, 3);
  const auto a = trace_to_csv(run(s.game, s.w, s.alpha, x0, opts).trace);
  const auto b = trace_to_csv(run(s.game, s.w, s.alpha, x0, opts).trace);
  EXPECT_EQ(a, b);
}

TEST(TraceCsv, Header) {
  const auto s = make_setup(4, 1);
  RunOptions opts;
  opts.max_iters = 2;
  const std::string csv =
      trace_to_csv(run(s.game, s.w, s.alpha, initial_estimates(InitKind::kZero, 4, 1), opts).trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,consensus_violation,distance_to_ne,avg_distance_to_ne,grad_norm,lemma1_slack,lemma2_slack,"
            "lemma3_slack");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
