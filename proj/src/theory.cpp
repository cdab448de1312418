#include "gplay/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gplay/error.hpp"
#include "gplay/format.hpp"

namespace gplay {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be a finite positive number");
  }
}

void validate_common(double mu, double l, long n) {
  require_positive(mu, "mu");
  require_positive(l, "L");
  if (n < 2) throw InputError("n must be at least 2");
}

void validate_sigma_open(double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) throw InputError("sigma must be in [0, 1)");
  if (sigma >= 1.0) throw InputError("sigma >= 1: the mixing matrix does not contract");
  if (sigma < kPerfectMixingSigma) {
    throw PerfectMixingError("perfect mixing: Theorem 1 terms degenerate (sigma = 0)");
  }
}

double beta_of(double sigma) { return 0.5 * (1.0 / (sigma * sigma) - 1.0); }

// sqrt(n^2 + eps) - n without cancellation.
double root_excess(double n, double eps) { return eps / (std::sqrt(n * n + eps) + n); }

void require_admissible(double mu, double l, double sigma, long n, double alpha) {
  const double amax = theorem1_terms(mu, l, sigma, n).alpha_max();
  if (!(alpha > 0.0) || !(alpha < amax)) {
    throw InadmissibleStepError("inadmissible step size alpha = " + format_double(alpha) +
                                " (need 0 < alpha < " + format_double(amax) + ")");
  }
}

}  // namespace

double TheoremTerms::alpha_max() const { return *std::min_element(terms.begin(), terms.end()); }

std::size_t TheoremTerms::binding() const {
  return static_cast<std::size_t>(std::min_element(terms.begin(), terms.end()) - terms.begin());
}

TheoremTerms theorem1_terms(double mu, double l, double sigma, long n) {
  validate_common(mu, l, n);
  validate_sigma_open(sigma);
  if (mu > l) {
    throw InputError("mu > L is impossible for a game (mu <= a_i <= L_i); check the constants");
  }
  const double nd = static_cast<double>(n);
  const double s2 = sigma * sigma;
  const double sqrt2 = std::sqrt(2.0);
  const double l2 = l * l;
  const double l4 = l2 * l2;
  const double mu4 = (mu * mu) * (mu * mu);

  TheoremTerms t;
  t.terms[0] = 1.0;
  t.terms[1] = mu / (2.0 * l2);
  t.terms[2] = sigma / (2.0 * l) * std::sqrt(nd / (nd - 1.0)) * (sqrt2 / std::sqrt(1.0 + s2) - 1.0);
  const double gap = std::sqrt(1.0 + s2) - sqrt2;
  t.terms[3] = nd / mu * (8.0 / (gap * gap) - 1.0);
  const double eps = 2.0 * mu4 * (1.0 - s2) / ((nd - 1.0) * l4 * (1.0 + s2));
  t.terms[4] = root_excess(nd, eps) / (2.0 * mu);
  return t;
}

double appendix_alpha_bound(double mu, double l, double sigma, long n) {
  validate_common(mu, l, n);
  if (!std::isfinite(sigma) || sigma < 0.0) throw InputError("sigma must be in [0, 1)");
  if (sigma >= 1.0) throw InputError("sigma >= 1: 1 - sigma^2 vanishes in the closed-form step bound");
  const double nd = static_cast<double>(n);
  const double s2 = sigma * sigma;
  const double c = 2.0 * (nd - 1.0) / (mu * mu * mu) * ((1.0 + s2) / (1.0 - s2)) * std::pow(l, 4);
  // (-n + sqrt(n^2 + 4 mu / c)) / (2 mu)
  return root_excess(nd, 4.0 * mu / c) / (2.0 * mu);
}

Eigen::Matrix2d detail::z_matrix_unchecked(double mu, double l, double sigma, long n,
                                           double alpha) {
  const double nd = static_cast<double>(n);
  const double beta = beta_of(sigma);
  const double gamma = 1.0 / (1.0 + mu * alpha / nd);
  const double k = std::sqrt((nd - 1.0) / nd);
  const double s = sigma + alpha * k * l;
  Eigen::Matrix2d z;
  z(0, 0) = gamma;
  z(0, 1) = gamma * 2.0 * l * l * alpha / mu;
  z(1, 0) = (1.0 + beta) / beta * ((nd - 1.0) / nd) * alpha * alpha * l * l;
  z(1, 1) = (1.0 + beta) * s * s;
  return z;
}

Eigen::Matrix2d z_matrix(double mu, double l, double sigma, long n, double alpha) {
  require_admissible(mu, l, sigma, n, alpha);
  return detail::z_matrix_unchecked(mu, l, sigma, n, alpha);
}

RateBound rate_bound(double mu, double l, double sigma, long n, double alpha) {
  require_admissible(mu, l, sigma, n, alpha);
  const double nd = static_cast<double>(n);
  const double s2 = sigma * sigma;
  const double k = std::sqrt((nd - 1.0) / nd);
  const double s = sigma + alpha * k * l;

  RateBound r;
  r.beta = beta_of(sigma);
  r.gamma = nd / (nd + mu * alpha);
  const double consensus = (1.0 + s2) / (2.0 * s2) * s * s;  // (1+beta) s^2
  const double coupling =
      8.0 * ((nd - 1.0) / (nd + mu * alpha)) * (alpha * alpha * alpha / mu) *
      ((1.0 + s2) / (1.0 - s2)) * std::pow(l, 4);
  const double diff = r.gamma - consensus;
  r.d = diff * diff + coupling;
  const double root = std::sqrt(r.d);
  r.q = 0.5 * (r.gamma + consensus + root);
  r.lambda2 = 0.5 * (r.gamma + consensus - root);

  // p(1) = (1 - l1)(1 - l2) = (1 - gamma)(1 - consensus) - coupling / 4.
  const double one_minus_gamma = mu * alpha / (nd + mu * alpha);
  const double p1 = one_minus_gamma * (1.0 - consensus) - 0.25 * coupling;
  r.gap = p1 / (1.0 - r.lambda2);

  if (!(r.q < 1.0) || !(r.gap > 0.0) || !std::isfinite(r.q)) {
    throw NumericError("rate bound does not contract (q = " + format_double(r.q) +
                       ") for an admissible step size");
  }
  return r;
}

ProofChain proof_chain(double mu, double l, double sigma, long n, double alpha) {
  require_admissible(mu, l, sigma, n, alpha);
  const double nd = static_cast<double>(n);
  const double beta = beta_of(sigma);
  const double s = sigma + alpha * std::sqrt((nd - 1.0) / nd) * l;
  const double rt = sigma * std::sqrt(1.0 + beta) + 1.0;

  ProofChain p;
  p.gamma = nd / (nd + mu * alpha);
  p.consensus_factor = (1.0 + beta) * s * s;
  p.consensus_ceiling = 0.25 * rt * rt;
  p.lambda1 = rate_bound(mu, l, sigma, n, alpha).q;
  p.lambda1_ceiling =
      p.gamma + std::sqrt(p.gamma * 2.0 * alpha * alpha * alpha / mu * (1.0 + beta) / beta *
                          ((nd - 1.0) / nd) * std::pow(l, 4));
  return p;
}

double envelope_constant(double mu, double l, double sigma, long n, double alpha,
                         double avg_sq0, double cons_sq0) {
  const RateBound r = rate_bound(mu, l, sigma, n, alpha);
  const Eigen::Matrix2d z = detail::z_matrix_unchecked(mu, l, sigma, n, alpha);
  const double k = 4.0 / (r.q - r.lambda2) *
                   ((z(0, 0) + z(1, 0)) * avg_sq0 + (z(0, 1) + z(1, 1)) * cons_sq0);
  return k / r.q;
}

StepSizePlan make_step_size_plan(double mu, double l, double sigma, long n,
                                 std::optional<double> alpha) {
  StepSizePlan p;
  p.mu = mu;
  p.l = l;
  p.sigma = sigma;
  p.n = n;
  p.terms = theorem1_terms(mu, l, sigma, n);
  p.alpha_max = p.terms.alpha_max();
  p.alpha = alpha.value_or(kAutoAlphaFraction * p.alpha_max);
  const RateBound r = rate_bound(mu, l, sigma, n, p.alpha);
  p.beta = r.beta;
  p.gamma = r.gamma;
  p.theta = mu;
  p.d = r.d;
  p.lambda1 = r.q;
  p.lambda2 = r.lambda2;
  p.q = r.q;
  p.gap = r.gap;
  return p;
}

std::string to_text(const StepSizePlan& p) {
  std::ostringstream out;
  out << "mu: " << format_double(p.mu) << '\n'
      << "L: " << format_double(p.l) << '\n'
      << "sigma: " << format_double(p.sigma) << '\n'
      << "n: " << p.n << '\n';
  for (std::size_t i = 0; i < p.terms.terms.size(); ++i) {
    out << "T" << (i + 1) << ": " << format_double(p.terms.terms[i]) << '\n';
  }
  out << "binding_term: T" << (p.terms.binding() + 1) << '\n'
      << "alpha_max: " << format_double(p.alpha_max) << '\n'
      << "alpha: " << format_double(p.alpha) << '\n'
      << "beta: " << format_double(p.beta) << '\n'
      << "gamma: " << format_double(p.gamma) << '\n'
      << "theta: " << format_double(p.theta) << '\n'
      << "D: " << format_double(p.d) << '\n'
      << "lambda1: " << format_double(p.lambda1) << '\n'
      << "lambda2: " << format_double(p.lambda2) << '\n'
      << "q: " << format_double(p.q) << '\n'
      << "one_minus_q: " << format_double(p.gap) << '\n';
  return out.str();
}

std::string to_json(const StepSizePlan& p) {
  nlohmann::json doc;
  doc["mu"] = p.mu;
  doc["L"] = p.l;
  doc["sigma"] = p.sigma;
  doc["n"] = p.n;
  doc["terms"] = p.terms.terms;
  doc["binding_term"] = p.terms.binding() + 1;
  doc["alpha_max"] = p.alpha_max;
  doc["alpha"] = p.alpha;
  doc["beta"] = p.beta;
  doc["gamma"] = p.gamma;
  doc["theta"] = p.theta;
  doc["D"] = p.d;
  doc["lambda1"] = p.lambda1;
  doc["lambda2"] = p.lambda2;
  doc["q"] = p.q;
  doc["one_minus_q"] = p.gap;
  return doc.dump(2) + "\n";
}

RateComparison grane_rate_comparison(double mu, double l, long n, std::optional<double> sigma) {
  validate_common(mu, l, n);
  const double nd = static_cast<double>(n);
  RateComparison c;
  c.n = n;
  c.kappa = l * std::sqrt(nd) / mu;
  if (c.kappa < 1.0) {
    throw InputError("condition number L sqrt(n) / mu = " + format_double(c.kappa) +
                     " < 1: inconsistent with a Lipschitz, strongly monotone mapping");
  }
  const double r = mu / l;
  c.grane_gap = std::pow(r, 6) / std::pow(nd, 6);
  c.play_gap = std::pow(r, 4) / (nd * nd * (nd - 1.0));
  c.ratio = c.play_gap / c.grane_gap;
  c.play_faster = c.play_gap > c.grane_gap;
  c.asymptotic_regime = n >= 10;
  if (sigma) {
    const double s = *sigma;
    if (!std::isfinite(s) || s < 0.0 || s >= 1.0) throw InputError("sigma must be in [0, 1)");
    const double s2 = s * s;
    c.alpha_asymptotic =
        mu * mu * mu * (1.0 - s2) / (2.0 * nd * (nd - 1.0) * std::pow(l, 4) * (1.0 + s2));
  }
  return c;
}

double grane_gamma_r(double mu, double l, long n, double sigma_max_i_minus_w,
                     double lambda_min_nonzero_i_minus_w) {
  validate_common(mu, l, n);
  require_positive(lambda_min_nonzero_i_minus_w, "lambda_min_nonzero(I - W)");
  if (!(sigma_max_i_minus_w >= 0.0)) throw InputError("sigma_max(I - W) must be nonnegative");
  const double nd = static_cast<double>(n);
  const double ratio = l / mu;
  return 2.0 * nd *
         (ratio + ratio * (1.0 + nd * nd * ratio * ratio) * sigma_max_i_minus_w /
                      lambda_min_nonzero_i_minus_w);
}

std::string to_text(const RateComparison& c) {
  std::ostringstream out;
  out << "# asymptotic comparison: gaps are order-of-magnitude expressions, "
         "not constant-accurate rates\n"
      << "n: " << c.n << '\n'
      << "kappa: " << format_double(c.kappa) << '\n'
      << "grane_gap: " << format_double(c.grane_gap) << '\n'
      << "play_gap: " << format_double(c.play_gap) << '\n'
      << "ratio: " << format_double(c.ratio) << '\n';
  if (c.alpha_asymptotic) out << "alpha_asymptotic: " << format_double(*c.alpha_asymptotic) << '\n';
  out << "play_faster: " << (c.play_faster ? "true" : "false") << '\n'
      << "asymptotic_regime: " << (c.asymptotic_regime ? "true" : "false (n < 10)") << '\n';
  return out.str();
}

std::string to_json(const RateComparison& c) {
  nlohmann::json doc;
  doc["n"] = c.n;
  doc["kappa"] = c.kappa;
  doc["grane_gap"] = c.grane_gap;
  doc["play_gap"] = c.play_gap;
  doc["ratio"] = c.ratio;
  doc["alpha_asymptotic"] = c.alpha_asymptotic ? nlohmann::json(*c.alpha_asymptotic) : nullptr;
  doc["play_faster"] = c.play_faster;
  doc["asymptotic_regime"] = c.asymptotic_regime;
  return doc.dump(2) + "\n";
}

AlphaScan scan_alpha(double mu, double l, double sigma, long n, int points) {
  if (points < 1) throw InputError("scan_alpha: need at least one grid point");
  const double amax = theorem1_terms(mu, l, sigma, n).alpha_max();
  AlphaScan best{0.0, 1.0};
  for (int k = 1; k <= points; ++k) {
    const double alpha = amax * k / (points + 1.0);
    const double q = rate_bound(mu, l, sigma, n, alpha).q;
    if (q < best.q) best = {alpha, q};
  }
  return best;
}

}  // namespace gplay
