#include "gplay/game.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "gplay/error.hpp"
#include "gplay/random.hpp"

namespace gplay {

QuadraticGame::QuadraticGame(Eigen::VectorXd a, Eigen::VectorXd b, Eigen::MatrixXd c,
                             std::optional<std::uint64_t> seed)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), seed_(seed) {
  const Eigen::Index n = a_.size();
  if (n < 1) throw InputError("game needs at least one player");
  if (b_.size() != n || c_.rows() != n || c_.cols() != n) {
    throw InputError("game coefficient shapes disagree with n = " + std::to_string(n));
  }
  if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite()) {
    throw InputError("game coefficients must be finite");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(a_(i) > 0.0)) throw InputError("a_" + std::to_string(i) + " must be positive");
    if (c_(i, i) != 0.0) throw InputError("coupling matrix must have a zero diagonal");
  }
  mapping_ = c_;
  mapping_.diagonal() = a_;
}

Eigen::VectorXd game_mapping(const QuadraticGame& game, const Eigen::VectorXd& x) {
  if (x.size() != game.size()) {
    throw InputError("game_mapping: x has length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(game.size()));
  }
  return game.mapping_matrix() * x + game.b();
}

double local_gradient(const QuadraticGame& game, Eigen::Index player,
                      const Eigen::Ref<const Eigen::VectorXd>& x_local) {
  if (player < 0 || player >= game.size()) {
    throw InputError("local_gradient: player index " + std::to_string(player) + " out of range");
  }
  if (x_local.size() != game.size()) throw InputError("local_gradient: dimension mismatch");
  return game.mapping_matrix().row(player).dot(x_local) + game.b()(player);
}

GameConstants estimate_constants(const QuadraticGame& game) {
  const Eigen::MatrixXd& a = game.mapping_matrix();
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("eigensolver failed on symmetric part");

  GameConstants k;
  k.mu = eig.eigenvalues().minCoeff();
  if (!(k.mu > 0.0)) {
    throw NotStronglyMonotoneError("game mapping is not strongly monotone: mu = " +
                                   std::to_string(k.mu));
  }
  k.l_per_player = a.rowwise().norm();
  k.l = k.l_per_player.maxCoeff();
  k.l_mapping = k.l * std::sqrt(static_cast<double>(game.size()));
  k.kappa = k.l_mapping / k.mu;
  return k;
}

Eigen::VectorXd solve_nash_equilibrium(const QuadraticGame& game) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(game.mapping_matrix());
  if (!lu.isInvertible()) throw NumericError("game mapping matrix is singular");
  Eigen::VectorXd x = lu.solve(-game.b());
  // One step of refinement; the residual bound is checked by callers' tests.
  x -= lu.solve(game_mapping(game, x));
  return x;
}

QuadraticGame random_game(Eigen::Index n, std::uint64_t seed, double coupling_scale) {
  if (n < 2) throw InputError("random_game: n must be at least 2");
  if (!(coupling_scale >= 0.0) || !std::isfinite(coupling_scale)) {
    throw InputError("random_game: coupling_scale must be a finite non-negative number");
  }
  Rng rng(seed);
  Eigen::VectorXd a(n), b(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.uniform(1.0, 2.0);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = rng.uniform(-1.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) c(i, j) = coupling_scale * rng.uniform(-1.0, 1.0);

  constexpr double kDominance = 0.9;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = c.row(i).cwiseAbs().sum();
    if (s > kDominance * a(i)) c.row(i) *= kDominance * a(i) / s;
  }
  // Shrinking columns only lowers row sums, so both bounds hold afterwards.
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = c.col(j).cwiseAbs().sum();
    if (s > kDominance * a(j)) c.col(j) *= kDominance * a(j) / s;
  }
  return QuadraticGame(std::move(a), std::move(b), std::move(c), seed);
}

std::string game_to_json(const QuadraticGame& game) {
  const Eigen::Index n = game.size();
  nlohmann::json doc;
  doc["n"] = n;
  doc["a"] = std::vector<double>(game.a().data(), game.a().data() + n);
  doc["b"] = std::vector<double>(game.b().data(), game.b().data() + n);
  std::vector<double> c;
  c.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c.push_back(game.c()(i, j));
  doc["c"] = std::move(c);
  if (game.seed()) doc["seed"] = *game.seed();
  return doc.dump(2) + "\n";
}

QuadraticGame game_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    const auto n = doc.at("n").get<Eigen::Index>();
    if (n < 1) throw InputError("game document: n must be positive");
    const auto a = doc.at("a").get<std::vector<double>>();
    const auto b = doc.at("b").get<std::vector<double>>();
    const auto c = doc.at("c").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(a.size()) != n || static_cast<Eigen::Index>(b.size()) != n ||
        static_cast<Eigen::Index>(c.size()) != n * n) {
      throw InputError("game document: array lengths disagree with n");
    }
    Eigen::MatrixXd cm(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) cm(i, j) = c[static_cast<std::size_t>(i * n + j)];
    std::optional<std::uint64_t> seed;
    if (doc.contains("seed") && !doc["seed"].is_null()) seed = doc["seed"].get<std::uint64_t>();
    return QuadraticGame(Eigen::Map<const Eigen::VectorXd>(a.data(), n),
                         Eigen::Map<const Eigen::VectorXd>(b.data(), n), std::move(cm), seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("game document: ") + e.what());
  }
}

}  // namespace gplay
