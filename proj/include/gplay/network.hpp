#pragma once

// Undirected communication graphs and doubly stochastic mixing matrices.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gplay {

// Undirected simple graph on nodes 0..n-1. Edges are stored once with
// first < second, sorted. Construction rejects self-loops and
// out-of-range endpoints; duplicates collapse.
class Graph {
 public:
  using Edge = std::pair<Eigen::Index, Eigen::Index>;

  Graph(Eigen::Index n, std::vector<Edge> edges);

  Eigen::Index size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Eigen::Index>& neighbors(Eigen::Index i) const { return adj_.at(i); }
  Eigen::Index degree(Eigen::Index i) const {
    return static_cast<Eigen::Index>(adj_.at(i).size());
  }
  bool has_edge(Eigen::Index i, Eigen::Index j) const;
  bool is_connected() const;

  friend bool operator==(const Graph& x, const Graph& y) {
    return x.n_ == y.n_ && x.edges_ == y.edges_;
  }

 private:
  Eigen::Index n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Eigen::Index>> adj_;
};

enum class Topology { kTree, kRing, kComplete, kStar };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& name);

// Node k (k = 1..n-1) attaches to a uniformly chosen earlier node.
Graph random_tree(Eigen::Index n, std::uint64_t seed);
Graph ring(Eigen::Index n);
Graph complete(Eigen::Index n);
// Node 0 is the center.
Graph star(Eigen::Index n);
// Dispatch on topology; seed is used for trees only.
Graph make_graph(Topology topology, Eigen::Index n, std::uint64_t seed);

struct MixingMatrix {
  Eigen::MatrixXd w;
  double sigma = 0.0;  // largest singular value of W - (1/n) 11^T

  Eigen::Index size() const { return w.rows(); }
};

// Largest singular value of the deflated matrix W - (1/n) 11^T.
double second_largest_singular_value(const Eigen::MatrixXd& w);

// Validates a user supplied W: square, nonnegative, doubly stochastic to
// 1e-12, and sigma < 1. Nonsymmetric W is accepted.
MixingMatrix make_mixing_matrix(Eigen::MatrixXd w);

// w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, w_ii = 1 - sum_j w_ij.
MixingMatrix metropolis_weights(const Graph& g);

// (I + W) / 2 for the Metropolis W. Same sparsity, sigma bounded away from 0
// (single-edge graphs give sigma = 1/2 instead of 0).
MixingMatrix lazy_metropolis_weights(const Graph& g);

enum class MixingRule { kMetropolis, kLazyMetropolis };
std::string to_string(MixingRule r);
MixingRule mixing_rule_from_string(const std::string& name);
MixingMatrix make_mixing(MixingRule rule, const Graph& g);

struct AverageProperty {
  double lhs = 0.0;  // ||W x - 1 xbar||
  double rhs = 0.0;  // sigma ||x - 1 xbar||
};

AverageProperty average_property_check(const MixingMatrix& w, const Eigen::VectorXd& x);

// Worst deviation of any row or column sum from 1.
double stochasticity_defect(const Eigen::MatrixXd& w);

// True iff w_ij > 0 exactly on edges (off-diagonal) of g.
bool sparsity_matches(const Eigen::MatrixXd& w, const Graph& g);

// One "i j" pair per line, 1-indexed, preceded by "# n <count>".
std::string graph_to_edge_list(const Graph& g);
Graph graph_from_edge_list(const std::string& text);

}  // namespace gplay
