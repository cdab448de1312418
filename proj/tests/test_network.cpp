#include <cmath>

#include <gtest/gtest.h>

#include "gplay/error.hpp"
#include "gplay/network.hpp"
#include "gplay/random.hpp"

using namespace gplay;

namespace {

// Oracle for symmetric W: W - (1/n)11^T is symmetric, so its largest singular
// value is its spectral radius; computed with a symmetric eigensolver, not an SVD.
double sigma_oracle(const Eigen::MatrixXd& w) {
  const auto n = w.rows();
  const Eigen::MatrixXd centered = w - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(centered).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Graph, CompleteThree) {
  const Graph g = complete(3);
  EXPECT_EQ(g.edges().size(), 3u);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_EQ(g.degree(i), 2);
  EXPECT_TRUE(g.is_connected());
}

TEST(Graph, RingFour) {
  const Graph g = ring(4);
  EXPECT_EQ(g.edges().size(), 4u);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(g.degree(i), 2);
  EXPECT_TRUE(g.has_edge(0, 3));
  EXPECT_TRUE(g.has_edge(3, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_THROW(ring(2), InputError);
}

TEST(Graph, StarFive) {
  const Graph g = star(5);
  EXPECT_EQ(g.degree(0), 4);
  for (Eigen::Index i = 1; i < 5; ++i) EXPECT_EQ(g.degree(i), 1);
}

TEST(Graph, RandomTreeIsSpanningTree) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed);
    const Graph g = random_tree(n, seed);
    EXPECT_EQ(static_cast<Eigen::Index>(g.edges().size()), n - 1);
    EXPECT_TRUE(g.is_connected());
  }
  EXPECT_EQ(random_tree(15, 7), random_tree(15, 7));
}

TEST(Graph, RejectsSelfLoopsAndBadIndices) {
  EXPECT_THROW(Graph(3, {{0, 0}}), InputError);
  EXPECT_THROW(Graph(3, {{0, 3}}), InputError);
  const Graph g(3, {{1, 0}, {0, 1}});
  EXPECT_EQ(g.edges().size(), 1u);
  EXPECT_FALSE(g.is_connected());
}

TEST(Graph, TopologyNames) {
  for (auto t : {Topology::kTree, Topology::kRing, Topology::kComplete, Topology::kStar}) {
    EXPECT_EQ(topology_from_string(to_string(t)), t);
  }
  EXPECT_THROW(topology_from_string("grid"), InputError);
}

TEST(Metropolis, StarThreeHandValues) {
  const MixingMatrix m = metropolis_weights(star(3));
  // center degree 2, leaves degree 1: w_0j = 1/(1+2)
  EXPECT_DOUBLE_EQ(m.w(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.w(0, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.w(0, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.w(1, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.w(2, 2), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.w(1, 2), 0.0);
}

TEST(Metropolis, CompleteTwoIsExactAverage) {
  const MixingMatrix m = metropolis_weights(complete(2));
  EXPECT_TRUE(m.w.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  EXPECT_LT(m.sigma, 1e-15);
}

TEST(Metropolis, RejectsDisconnectedGraph) {
  EXPECT_THROW(metropolis_weights(Graph(4, {{0, 1}, {2, 3}})), InputError);
}

TEST(MixingMatrix, IdentityHasUnitSigmaAndIsRejected) {
  EXPECT_NEAR(second_largest_singular_value(Eigen::MatrixXd::Identity(4, 4)), 1.0, 1e-15);
  EXPECT_THROW(make_mixing_matrix(Eigen::MatrixXd::Identity(4, 4)), InputError);
}

TEST(MixingMatrix, RejectsNonStochastic) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  w(0, 0) += 0.1;
  EXPECT_THROW(make_mixing_matrix(w), InputError);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.5, -0.5, -0.5, 1.5;
  EXPECT_THROW(make_mixing_matrix(neg), InputError);
}

TEST(MixingMatrix, AllTopologiesSatisfyAssumptions) {
  for (auto rule : {MixingRule::kMetropolis, MixingRule::kLazyMetropolis}) {
    for (auto topo : {Topology::kTree, Topology::kRing, Topology::kComplete, Topology::kStar}) {
      for (Eigen::Index n : {3, 5, 10, 20, 40}) {
        const Graph g = make_graph(topo, n, 17);
        const MixingMatrix m = make_mixing(rule, g);
        EXPECT_LE(stochasticity_defect(m.w), 1e-12);
        EXPECT_TRUE(sparsity_matches(m.w, g));
        EXPECT_TRUE(m.w.isApprox(m.w.transpose(), 0.0) || (m.w - m.w.transpose()).cwiseAbs().maxCoeff() == 0.0);
        EXPECT_GE(m.w.minCoeff(), 0.0);
        EXPECT_LT(m.sigma, 1.0);
        EXPECT_NEAR(m.sigma, sigma_oracle(m.w), 1e-10);
      }
    }
  }
}

TEST(MixingMatrix, RingSigmaClosedForm) {
  // Metropolis on ring(n) is the circulant (1/3)(I + S + S^T); eigenvalues
  // (1 + 2 cos(2 pi k / n)) / 3 and sigma is the largest |.| over k != 0.
  for (Eigen::Index n : {3, 4, 7, 12}) {
    double expect = 0.0;
    for (Eigen::Index k = 1; k < n; ++k) {
      expect = std::max(expect, std::abs((1.0 + 2.0 * std::cos(2.0 * M_PI * k / n)) / 3.0));
    }
    EXPECT_NEAR(metropolis_weights(ring(n)).sigma, expect, 1e-12);
  }
}

TEST(MixingMatrix, LazyMetropolisIsHalfway) {
  const Graph g = random_tree(9, 3);
  const MixingMatrix m = metropolis_weights(g);
  const MixingMatrix lazy = lazy_metropolis_weights(g);
  EXPECT_TRUE(lazy.w.isApprox(0.5 * (Eigen::MatrixXd::Identity(9, 9) + m.w)));
  EXPECT_NEAR(lazy.sigma, sigma_oracle(lazy.w), 1e-10);
  EXPECT_EQ(mixing_rule_from_string(to_string(MixingRule::kLazyMetropolis)), MixingRule::kLazyMetropolis);
}

TEST(MixingMatrix, AveragePropertyOnRandomVectors) {
  Rng rng(2024);
  for (auto topo : {Topology::kTree, Topology::kRing, Topology::kStar}) {
    const MixingMatrix m = metropolis_weights(make_graph(topo, 12, 5));
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd x(12);
      for (Eigen::Index i = 0; i < 12; ++i) x(i) = rng.uniform(-10.0, 10.0);
      const auto check = average_property_check(m, x);
      EXPECT_LE(check.lhs, check.rhs * (1.0 + 1e-12) + 1e-12);
    }
  }
}

TEST(MixingMatrix, AveragePropertyIsTightOnTopSingularVector) {
  const MixingMatrix m = metropolis_weights(ring(6));
  const Eigen::MatrixXd centered = m.w - Eigen::MatrixXd::Constant(6, 6, 1.0 / 6.0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  const auto check = average_property_check(m, svd.matrixV().col(0));
  EXPECT_NEAR(check.lhs, check.rhs, 1e-12);
}

TEST(EdgeList, RoundTrip) {
  for (auto topo : {Topology::kTree, Topology::kRing, Topology::kComplete, Topology::kStar}) {
    const Graph g = make_graph(topo, 8, 4);
    EXPECT_EQ(graph_from_edge_list(graph_to_edge_list(g)), g);
  }
}

TEST(EdgeList, OneIndexedFormat) {
  const std::string text = graph_to_edge_list(star(3));
  EXPECT_NE(text.find("1 2"), std::string::npos);
  EXPECT_NE(text.find("1 3"), std::string::npos);
  EXPECT_THROW(graph_from_edge_list("# n 2\n0 1\n"), InputError);
  EXPECT_THROW(graph_from_edge_list("# n 2\n1 x\n"), InputError);
}
