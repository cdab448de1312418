#include "gplay/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gplay/error.hpp"
#include "gplay/random.hpp"

namespace gplay {

Graph::Graph(Eigen::Index n, std::vector<Edge> edges) : n_(n), adj_(static_cast<std::size_t>(n)) {
  if (n < 1) throw InputError("graph needs at least one node");
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw InputError("edge endpoint out of range");
    if (i == j) throw InputError("self-loops are not allowed");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [i, j] : edges_) {
    adj_[static_cast<std::size_t>(i)].push_back(j);
    adj_[static_cast<std::size_t>(j)].push_back(i);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

bool Graph::has_edge(Eigen::Index i, Eigen::Index j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

bool Graph::is_connected() const {
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index u : adj_[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == n_;
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::kTree: return "tree";
    case Topology::kRing: return "ring";
    case Topology::kComplete: return "complete";
    case Topology::kStar: return "star";
  }
  return "unknown";
}

Topology topology_from_string(const std::string& name) {
  if (name == "tree") return Topology::kTree;
  if (name == "ring") return Topology::kRing;
  if (name == "complete") return Topology::kComplete;
  if (name == "star") return Topology::kStar;
  throw InputError("unknown topology '" + name + "' (expected tree, ring, complete or star)");
}

Graph random_tree(Eigen::Index n, std::uint64_t seed) {
  if (n < 2) throw InputError("random_tree: n must be at least 2");
  Rng rng(seed);
  std::vector<Graph::Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index k = 1; k < n; ++k) {
    const auto parent = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
    edges.emplace_back(parent, k);
  }
  return Graph(n, std::move(edges));
}

Graph ring(Eigen::Index n) {
  if (n < 3) throw InputError("ring: n must be at least 3");
  std::vector<Graph::Edge> edges;
  for (Eigen::Index k = 0; k < n; ++k) edges.emplace_back(k, (k + 1) % n);
  return Graph(n, std::move(edges));
}

Graph complete(Eigen::Index n) {
  if (n < 2) throw InputError("complete: n must be at least 2");
  std::vector<Graph::Edge> edges;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

Graph star(Eigen::Index n) {
  if (n < 2) throw InputError("star: n must be at least 2");
  std::vector<Graph::Edge> edges;
  for (Eigen::Index k = 1; k < n; ++k) edges.emplace_back(0, k);
  return Graph(n, std::move(edges));
}

Graph make_graph(Topology topology, Eigen::Index n, std::uint64_t seed) {
  switch (topology) {
    case Topology::kTree: return random_tree(n, seed);
    case Topology::kRing: return ring(n);
    case Topology::kComplete: return complete(n);
    case Topology::kStar: return star(n);
  }
  throw InputError("unknown topology");
}

double second_largest_singular_value(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw InputError("second_largest_singular_value: matrix must be square and non-empty");
  }
  const auto n = static_cast<double>(w.rows());
  const Eigen::MatrixXd deflated = w.array() - 1.0 / n;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(deflated);
  return svd.singularValues()(0);
}

double stochasticity_defect(const Eigen::MatrixXd& w) {
  const double rows = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

bool sparsity_matches(const Eigen::MatrixXd& w, const Graph& g) {
  if (w.rows() != g.size() || w.cols() != g.size()) return false;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (i != j && ((w(i, j) > 0.0) != g.has_edge(i, j))) return false;
  return true;
}

MixingMatrix make_mixing_matrix(Eigen::MatrixXd w) {
  if (w.rows() != w.cols() || w.rows() == 0) throw InputError("mixing matrix must be square");
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw InputError("mixing matrix entries must be finite and nonnegative");
  }
  constexpr double kTol = 1e-12;
  if (stochasticity_defect(w) > kTol) throw InputError("mixing matrix is not doubly stochastic");
  const double sigma = second_largest_singular_value(w);
  if (!(sigma < 1.0 - kTol)) {
    throw InputError("mixing matrix does not contract disagreement (sigma >= 1); "
                     "is the graph connected?");
  }
  return MixingMatrix{std::move(w), sigma};
}

MixingMatrix metropolis_weights(const Graph& g) {
  if (!g.is_connected()) throw InputError("metropolis_weights: graph is not connected");
  const Eigen::Index n = g.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges()) {
    const double wij = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(i), g.degree(j))));
    w(i, j) = wij;
    w(j, i) = wij;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j : g.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  const double sigma = second_largest_singular_value(w);
  return MixingMatrix{std::move(w), sigma};
}

MixingMatrix lazy_metropolis_weights(const Graph& g) {
  MixingMatrix m = metropolis_weights(g);
  m.w = 0.5 * (Eigen::MatrixXd::Identity(g.size(), g.size()) + m.w);
  m.sigma = second_largest_singular_value(m.w);
  return m;
}

std::string to_string(MixingRule r) {
  return r == MixingRule::kMetropolis ? "metropolis" : "lazy-metropolis";
}

MixingRule mixing_rule_from_string(const std::string& name) {
  if (name == "metropolis") return MixingRule::kMetropolis;
  if (name == "lazy-metropolis") return MixingRule::kLazyMetropolis;
  throw InputError("unknown mixing rule '" + name + "' (expected metropolis or lazy-metropolis)");
}

MixingMatrix make_mixing(MixingRule rule, const Graph& g) {
  return rule == MixingRule::kMetropolis ? metropolis_weights(g) : lazy_metropolis_weights(g);
}

AverageProperty average_property_check(const MixingMatrix& w, const Eigen::VectorXd& x) {
  if (x.size() != w.size()) throw InputError("average_property_check: dimension mismatch");
  const double mean = x.mean();
  const Eigen::VectorXd centered = x.array() - mean;
  const Eigen::VectorXd mixed = (w.w * x).array() - mean;
  return AverageProperty{mixed.norm(), w.sigma * centered.norm()};
}

std::string graph_to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "# n " << g.size() << '\n';
  for (const auto& [i, j] : g.edges()) out << (i + 1) << ' ' << (j + 1) << '\n';
  return out.str();
}

Graph graph_from_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Eigen::Index n = 0;
  std::vector<Graph::Edge> edges;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    if (line.rfind("#", 0) == 0) {
      std::string hash, key;
      Eigen::Index value = 0;
      if (ls >> hash >> key >> value && key == "n") n = std::max(n, value);
      continue;
    }
    Eigen::Index i = 0, j = 0;
    if (!(ls >> i)) continue;
    if (!(ls >> j)) throw InputError("edge list: malformed line '" + line + "'");
    if (i < 1 || j < 1) throw InputError("edge list: nodes are 1-indexed");
    edges.emplace_back(i - 1, j - 1);
    n = std::max({n, i, j});
  }
  return Graph(n, std::move(edges));
}

}  // namespace gplay
