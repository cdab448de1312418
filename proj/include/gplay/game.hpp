#pragma once

// Quadratic games J_i(x) = 0.5 a_i x_i^2 + b_i x_i + (sum_{j != i} c_ij x_j) x_i
// with scalar actions. The game mapping stacks the partial gradients
// d J_i / d x_i, which for this class is the affine map F(x) = A x + b with
// A_ii = a_i and A_ij = c_ij.

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace gplay {

class QuadraticGame {
 public:
  // Validates shapes, a_i > 0 and a zero diagonal in c. Strong monotonicity
  // is checked separately by estimate_constants().
  QuadraticGame(Eigen::VectorXd a, Eigen::VectorXd b, Eigen::MatrixXd c,
                std::optional<std::uint64_t> seed = std::nullopt);

  Eigen::Index size() const { return a_.size(); }
  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::MatrixXd& c() const { return c_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  // A with A_ii = a_i, A_ij = c_ij.
  const Eigen::MatrixXd& mapping_matrix() const { return mapping_; }

  friend bool operator==(const QuadraticGame& x, const QuadraticGame& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && x.c_ == y.c_ && x.seed_ == y.seed_;
  }

 private:
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd c_;
  Eigen::MatrixXd mapping_;
  std::optional<std::uint64_t> seed_;
};

struct GameConstants {
  double mu = 0.0;               // strong monotonicity constant
  Eigen::VectorXd l_per_player;  // Lipschitz constant of grad_i J_i
  double l = 0.0;                // max_i L_i
  double l_mapping = 0.0;        // L * sqrt(n)
  double kappa = 0.0;            // L * sqrt(n) / mu
};

// F(x) = A x + b.
Eigen::VectorXd game_mapping(const QuadraticGame& game, const Eigen::VectorXd& x);

// grad_i J_i evaluated at player i's own estimate of the joint action.
// `player` is zero-based.
double local_gradient(const QuadraticGame& game, Eigen::Index player,
                      const Eigen::Ref<const Eigen::VectorXd>& x_local);

// mu = lambda_min((A + A^T) / 2), L_i = ||row_i(A)||_2. Throws
// NotStronglyMonotoneError when mu <= 0.
GameConstants estimate_constants(const QuadraticGame& game);

// Unique x* with F(x*) = 0.
Eigen::VectorXd solve_nash_equilibrium(const QuadraticGame& game);

// a_i ~ U[1,2], b_i ~ U[-1,1], c_ij ~ coupling_scale * U[-1,1]. Rows and then
// columns of c are shrunk so that both the row and the column absolute sums
// stay within 0.9 a_i; the symmetric part is then strictly diagonally
// dominant and mu >= 0.1 min_i a_i.
QuadraticGame random_game(Eigen::Index n, std::uint64_t seed, double coupling_scale);

// JSON document {"n", "a", "b", "c" (row-major n*n), "seed"?}.
std::string game_to_json(const QuadraticGame& game);
QuadraticGame game_from_json(const std::string& text);

}  // namespace gplay
