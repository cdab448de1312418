#pragma once

// Closed-form step-size ceilings and contraction rates for distributed
// gradient play x^{t+1} = W x^t - alpha diag-gradient(x^t).
//
// Symbols shared by every function below:
//   mu     strong monotonicity constant of the game mapping
//   l      L = max_i L_i, per-player gradient Lipschitz constant
//   sigma  second largest singular value of W
//   n      number of players
//
// The rate analysis tracks z^t = (||xbar^t - x*||_F^2, ||x^t - xbar^t||_F^2)
// through a 2x2 positive comparison matrix Z with z^{t+1} <= Z z^t; its
// Perron root is the contraction rate q(alpha). beta = (1/sigma^2 - 1) / 2
// and gamma = 1 / (1 + mu alpha / n) throughout.

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace gplay {

// sigma below this is treated as exact averaging.
inline constexpr double kPerfectMixingSigma = 1e-12;

struct TheoremTerms {
  std::array<double, 5> terms{};

  double alpha_max() const;
  // Zero-based index of the smallest term.
  std::size_t binding() const;
};

// Five step-size ceilings, in order:
//   T1 = 1
//   T2 = mu / (2 L^2)
//   T3 = sigma / (2L) sqrt(n/(n-1)) (sqrt2 / sqrt(1+sigma^2) - 1)
//   T4 = n/mu (8 / (sqrt(1+sigma^2) - sqrt2)^2 - 1)
//   T5 = (sqrt(n^2 + 2 mu^4 (1-sigma^2) / ((n-1) L^4 (1+sigma^2))) - n) / (2 mu)
// Throws PerfectMixingError for sigma < kPerfectMixingSigma, InputError for
// sigma >= 1, n < 2, non-positive constants, or mu > L (no game has both).
TheoremTerms theorem1_terms(double mu, double l, double sigma, long n);

// T5 derived the other way round: positive root of c mu a^2 + n c a - 1 with
// c = 2(n-1)/mu^3 (1+sigma^2)/(1-sigma^2) L^4. Accepts sigma in [0, 1).
double appendix_alpha_bound(double mu, double l, double sigma, long n);

struct RateBound {
  double q = 0.0;        // lambda1, Perron root of Z
  double lambda2 = 0.0;
  double d = 0.0;        // discriminant of the characteristic polynomial
  double gamma = 0.0;
  double beta = 0.0;
  double gap = 0.0;      // 1 - q, evaluated without cancellation
};

// Throws InadmissibleStepError unless 0 < alpha < alpha_max.
RateBound rate_bound(double mu, double l, double sigma, long n, double alpha);

// [[gamma,                                gamma 2 L^2 alpha / mu],
//  [(1+beta)/beta (n-1)/n alpha^2 L^2,    (1+beta)(sigma + alpha sqrt((n-1)/n) L)^2]]
// Same admissibility check as rate_bound.
Eigen::Matrix2d z_matrix(double mu, double l, double sigma, long n, double alpha);

namespace detail {
// z_matrix without the step-size ceiling. The comparison z^{t+1} <= Z z^t
// needs only alpha <= mu / L^2 and 0 < sigma < 1.
Eigen::Matrix2d z_matrix_unchecked(double mu, double l, double sigma, long n, double alpha);
}  // namespace detail

// Intermediate quantities of the lambda1 < 1 argument, for auditing.
struct ProofChain {
  double consensus_factor = 0.0;   // (1+beta)(sigma + alpha sqrt((n-1)/n) L)^2
  double consensus_ceiling = 0.0;  // (sigma sqrt(1+beta) + 1)^2 / 4, the T3 consequence
  double gamma = 0.0;
  double lambda1 = 0.0;
  double lambda1_ceiling = 0.0;    // gamma + sqrt(gamma 2a^3/mu (1+beta)/beta (n-1)/n L^4)
};

ProofChain proof_chain(double mu, double l, double sigma, long n, double alpha);

// C such that ||x^t - x*||_F^2 <= C q^t for t >= 1, from
// ||x^{t+1} - x*||^2 <= q^t 4/(l1 - l2) [(z11 + z21) a0 + (z12 + z22) c0]
// with a0 = ||xbar^0 - x*||_F^2 and c0 = ||x^0 - xbar^0||_F^2.
double envelope_constant(double mu, double l, double sigma, long n, double alpha,
                         double avg_sq0, double cons_sq0);

struct StepSizePlan {
  double mu = 0.0;
  double l = 0.0;
  double sigma = 0.0;
  long n = 0;
  TheoremTerms terms;
  double alpha_max = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double theta = 0.0;  // Lemma-3 parameter, fixed to mu
  double d = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double q = 0.0;
  double gap = 0.0;
};

inline constexpr double kAutoAlphaFraction = 0.9;

// alpha defaults to kAutoAlphaFraction * alpha_max.
StepSizePlan make_step_size_plan(double mu, double l, double sigma, long n,
                                 std::optional<double> alpha = std::nullopt);

std::string to_text(const StepSizePlan& plan);
std::string to_json(const StepSizePlan& plan);

// Asymptotic comparison against the GRANE rate 1 - mu^6 / (L^6 n^6).
struct RateComparison {
  double grane_gap = 0.0;                  // mu^6 / (L^6 n^6)
  double play_gap = 0.0;                   // mu^4 / (L^4 n^2 (n-1))
  std::optional<double> alpha_asymptotic;  // mu^3 (1-s^2) / (2n(n-1) L^4 (1+s^2))
  double kappa = 0.0;                      // L sqrt(n) / mu
  double ratio = 0.0;                      // play_gap / grane_gap
  bool play_faster = false;
  bool asymptotic_regime = false;          // n >= 10
  long n = 0;
};

// Throws InputError if kappa < 1.
RateComparison grane_rate_comparison(double mu, double l, long n,
                                     std::optional<double> sigma = std::nullopt);

// gamma_r = 2n [L/mu + (L/mu)(1 + n^2 L^2/mu^2) smax / lmin] with
// smax = sigma_max(I - W), lmin = smallest nonzero eigenvalue of I - W.
// Informational only.
double grane_gamma_r(double mu, double l, long n, double sigma_max_i_minus_w,
                     double lambda_min_nonzero_i_minus_w);

std::string to_text(const RateComparison& cmp);
std::string to_json(const RateComparison& cmp);

// Smallest q over `points` evenly spaced alphas in (0, alpha_max). A
// convenience scan, not an optimality guarantee.
struct AlphaScan {
  double alpha = 0.0;
  double q = 0.0;
};
AlphaScan scan_alpha(double mu, double l, double sigma, long n, int points);

}  // namespace gplay
