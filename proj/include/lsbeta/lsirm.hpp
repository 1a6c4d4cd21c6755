#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lsbeta/config.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/numerics.hpp"
#include "lsbeta/votes.hpp"

namespace lsbeta {

/// One draw of the latent-space item response parameters. The distance scale
/// is held on the log scale so that it is positive by construction.
struct LsirmState {
  Eigen::VectorXd a;  // legislator intercepts (N)
  Eigen::VectorXd b;  // bill intercepts (P)
  double log_gamma = 0.0;
  Eigen::MatrixXd Z;  // legislator positions (N x S)
  Eigen::MatrixXd W;  // bill positions (P x S)
  double sigma2_a = 1.0;
  double sigma2_b = 1.0;

  double gamma() const { return std::exp(log_gamma); }
  std::size_t n_legislators() const { return static_cast<std::size_t>(a.size()); }
  std::size_t n_bills() const { return static_cast<std::size_t>(b.size()); }
  int latent_dim() const { return static_cast<int>(Z.cols()); }

  void validate() const {
    if (Z.rows() != a.size() || W.rows() != b.size() || Z.cols() != W.cols())
      throw ConfigError("LsirmState: inconsistent dimensions");
    if (!std::isfinite(log_gamma) || !a.allFinite() || !b.allFinite() || !Z.allFinite() || !W.allFinite())
      throw NumericError("LsirmState: non-finite entry");
    if (!(sigma2_a > 0.0) || !(sigma2_b > 0.0) || !std::isfinite(sigma2_a) || !std::isfinite(sigma2_b))
      throw NumericError("LsirmState: variance hyperparameters must be positive");
  }
};

/// Imputed values for the missing cells of a vote matrix, in row-major cell
/// order. Replaced wholesale every iteration; never stored as data.
struct ImputationOverlay {
  std::vector<std::size_t> cells;
  std::vector<std::uint8_t> values;

  bool empty() const { return cells.empty(); }
};

inline double distance(const LsirmState& s, std::size_t i, std::size_t j) {
  return (s.Z.row(static_cast<Eigen::Index>(i)) - s.W.row(static_cast<Eigen::Index>(j))).norm();
}

inline Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& W) {
  Eigen::MatrixXd d(Z.rows(), W.rows());
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index j = 0; j < W.rows(); ++j) d(i, j) = (Z.row(i) - W.row(j)).norm();
  return d;
}

inline Eigen::MatrixXd distance_matrix(const LsirmState& s) { return distance_matrix(s.Z, s.W); }

inline double linear_predictor(const LsirmState& s, std::size_t i, std::size_t j) {
  return s.a(static_cast<Eigen::Index>(i)) + s.b(static_cast<Eigen::Index>(j)) - s.gamma() * distance(s, i, j);
}

/// P(y_ij = 1) = logistic(a_i + b_j - gamma * ||z_i - w_j||).
inline double vote_prob(const LsirmState& s, std::size_t i, std::size_t j) {
  return logistic(linear_predictor(s, i, j));
}

/// Bernoulli log-likelihood summed over observed cells in row-major order.
/// Missing cells contribute nothing unless the overlay supplies a value.
inline double loglik_votes(const LsirmState& s, const VoteMatrix& votes, const ImputationOverlay* overlay = nullptr) {
  const std::size_t N = votes.n_legislators(), P = votes.n_bills();
  if (s.n_legislators() != N || s.n_bills() != P) throw ConfigError("loglik_votes: dimension mismatch");
  std::vector<std::int8_t> imputed;
  if (overlay && !overlay->empty()) {
    imputed.assign(N * P, -1);
    for (std::size_t k = 0; k < overlay->cells.size(); ++k)
      imputed[overlay->cells[k]] = static_cast<std::int8_t>(overlay->values[k]);
  }
  const double gamma = s.gamma();
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < P; ++j) {
      const Vote v = votes(i, j);
      bool y;
      if (v == Vote::Missing) {
        if (imputed.empty() || imputed[i * P + j] < 0) continue;
        y = imputed[i * P + j] == 1;
      } else {
        y = v == Vote::Yea;
      }
      const double eta = s.a(i) + s.b(j) - gamma * distance(s, i, j);
      total += bernoulli_logit_logpmf(y, eta);
    }
  }
  return total;
}

namespace detail {

inline double normal_logpdf(double x, double mean, double var) {
  return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * (x - mean) * (x - mean) / var;
}

inline double inverse_gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

inline double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace detail

/// Log prior of the LSIRM block: normal intercepts, standard normal latent
/// positions, normal on log gamma, inverse-gamma variance hyperparameters.
inline double logprior_lsirm(const LsirmState& s, const ModelConfig& cfg) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < s.a.size(); ++i) lp += detail::normal_logpdf(s.a(i), 0.0, s.sigma2_a);
  for (Eigen::Index j = 0; j < s.b.size(); ++j) lp += detail::normal_logpdf(s.b(j), 0.0, s.sigma2_b);
  const double S = static_cast<double>(s.Z.cols());
  for (Eigen::Index i = 0; i < s.Z.rows(); ++i) lp += -0.5 * S * kLogTwoPi - 0.5 * s.Z.row(i).squaredNorm();
  for (Eigen::Index j = 0; j < s.W.rows(); ++j) lp += -0.5 * S * kLogTwoPi - 0.5 * s.W.row(j).squaredNorm();
  lp += detail::normal_logpdf(s.log_gamma, cfg.mu_gamma, cfg.sigma2_gamma);
  lp += detail::inverse_gamma_logpdf(s.sigma2_a, cfg.a_sigma, cfg.b_sigma);
  lp += detail::inverse_gamma_logpdf(s.sigma2_b, cfg.a_sigma, cfg.b_sigma);
  return lp;
}

}  // namespace lsbeta
