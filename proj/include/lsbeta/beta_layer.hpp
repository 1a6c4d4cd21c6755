#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

#include "lsbeta/affinity.hpp"
#include "lsbeta/config.hpp"
#include "lsbeta/covariates.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/lsirm.hpp"
#include "lsbeta/numerics.hpp"

namespace lsbeta {

/// Legislator issue coefficients (rows beta_i of B, N x K) and the global
/// beta precision phi.
struct RegressionState {
  Eigen::MatrixXd B;
  double phi = 10.0;

  void validate() const {
    if (!(phi > 0.0) || !std::isfinite(phi)) throw NumericError("RegressionState: phi must be positive");
    if (!B.allFinite()) throw NumericError("RegressionState: non-finite coefficient");
  }
};

inline double clamp_unit(double t, double eps) { return std::min(std::max(t, eps), 1.0 - eps); }

/// Log density of Beta(mu * phi, (1 - mu) * phi) at t.
inline double beta_logpdf_mean_precision(double t, double mu, double phi) {
  if (t <= 0.0 || t >= 1.0) throw NumericError("boundary affinity: t must lie strictly inside (0,1)");
  if (!(mu > 0.0 && mu < 1.0)) throw NumericError("beta mean must lie strictly inside (0,1)");
  if (!(phi > 0.0)) throw NumericError("beta precision must be positive");
  const double p = mu * phi, q = (1.0 - mu) * phi;
  return std::lgamma(phi) - std::lgamma(p) - std::lgamma(q) + (p - 1.0) * std::log(t) + (q - 1.0) * std::log1p(-t);
}

template <typename X, typename B>
double mu_of(const X& x, const B& beta) {
  if (x.size() != beta.size()) throw ConfigError("mu_of: covariate and coefficient lengths differ");
  return logistic(x.dot(beta));
}

inline Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& distances, AffinityTransform tr) {
  return distances.unaryExpr([tr](double d) { return affinity(tr, d); });
}

inline Eigen::MatrixXd affinity_matrix(const LsirmState& s, AffinityTransform tr) {
  return affinity_matrix(distance_matrix(s), tr);
}

/// Summed beta log-density of all affinities. With clamping on, t and the
/// fitted mean are both held inside [eps, 1 - eps]; otherwise a boundary value
/// raises.
inline double loglik_beta(const Eigen::MatrixXd& T, const CovariateMatrix& X, const RegressionState& reg,
                          bool clamp = true, double eps = 1e-10) {
  const auto N = T.rows(), P = T.cols();
  if (reg.B.rows() != N || static_cast<std::size_t>(P) != X.n_bills() ||
      static_cast<std::size_t>(reg.B.cols()) != X.n_covariates())
    throw ConfigError("loglik_beta: dimension mismatch");
  const Eigen::MatrixXd eta = reg.B * X.values().transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < P; ++j) {
      const double t = clamp ? clamp_unit(T(i, j), eps) : T(i, j);
      const double mu = clamp_unit(logistic(eta(i, j)), eps);
      total += beta_logpdf_mean_precision(t, mu, reg.phi);
    }
  }
  return total;
}

/// Analytic d loglik_beta / d beta_ik (ignores the clamp on the mean).
inline Eigen::MatrixXd grad_loglik_beta(const Eigen::MatrixXd& T, const CovariateMatrix& X, const RegressionState& reg,
                                        double eps = 1e-10) {
  using boost::math::digamma;
  const auto N = T.rows(), P = T.cols();
  const Eigen::MatrixXd eta = reg.B * X.values().transpose();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(N, X.values().cols());
  const double phi = reg.phi;
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < P; ++j) {
      const double t = clamp_unit(T(i, j), eps);
      const double mu = logistic(eta(i, j));
      const double score = phi * (std::log(t) - std::log1p(-t) - digamma(mu * phi) + digamma((1.0 - mu) * phi));
      grad.row(i) += score * mu * (1.0 - mu) * X.values().row(j);
    }
  }
  return grad;
}

/// Prior on each coefficient row: Zellner N(0, g (X'X)^{-1}) or diffuse
/// N(0, sigma2_B I). Precomputes the precision, log normalizer, and a
/// Cholesky factor of the prior covariance shape used to precondition
/// random-walk proposals.
class RegressionPrior {
 public:
  RegressionPrior(const CovariateMatrix& X, const ModelConfig& cfg) {
    const Eigen::Index K = X.values().cols();
    const Eigen::MatrixXd xtx = X.values().transpose() * X.values();
    const Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    if (llt.info() != Eigen::Success) throw NumericError("X'X is not invertible");
    const Eigen::MatrixXd xtx_inv = llt.solve(Eigen::MatrixXd::Identity(K, K));
    const Eigen::LLT<Eigen::MatrixXd> inv_llt(xtx_inv);
    if (inv_llt.info() != Eigen::Success) throw NumericError("(X'X)^{-1} is not positive definite");
    proposal_factor_ = inv_llt.matrixL();
    if (cfg.coefficient_prior == CoefficientPrior::Zellner) {
      const double g = cfg.g_for(X.n_bills());
      precision_ = xtx / g;
      double logdet_xtx = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) logdet_xtx += 2.0 * std::log(llt.matrixL()(k, k));
      // log|Sigma^{-1}| = log|X'X| - K log g
      log_norm_ = -0.5 * static_cast<double>(K) * kLogTwoPi + 0.5 * (logdet_xtx - static_cast<double>(K) * std::log(g));
    } else {
      precision_ = Eigen::MatrixXd::Identity(K, K) / cfg.sigma2_B;
      log_norm_ = -0.5 * static_cast<double>(K) * (kLogTwoPi + std::log(cfg.sigma2_B));
    }
  }

  template <typename V>
  double log_density(const V& beta) const {
    return log_norm_ - 0.5 * beta.dot(precision_ * beta);
  }

  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& proposal_factor() const { return proposal_factor_; }

 private:
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd proposal_factor_;
  double log_norm_ = 0.0;
};

inline double logprior_phi(double phi, const ModelConfig& cfg) { return detail::gamma_logpdf(phi, cfg.a_phi, cfg.b_phi); }

inline double logprior_regression(const RegressionState& reg, const CovariateMatrix& X, const ModelConfig& cfg) {
  const RegressionPrior prior(X, cfg);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < reg.B.rows(); ++i) lp += prior.log_density(reg.B.row(i).transpose());
  return lp + logprior_phi(reg.phi, cfg);
}

}  // namespace lsbeta
