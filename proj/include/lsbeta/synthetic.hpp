#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "lsbeta/beta_layer.hpp"
#include "lsbeta/covariates.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/lsirm.hpp"
#include "lsbeta/rng.hpp"
#include "lsbeta/votes.hpp"

namespace lsbeta {

struct PartyBlueprint {
  std::string label;
  std::size_t size = 0;
  std::vector<double> centroid;
  double spread = 0.25;
};

struct BillClusterBlueprint {
  std::size_t size = 0;
  std::vector<double> center;
  double spread = 0.8;
  std::vector<double> topic_concentration;  // Dirichlet parameters, one per topic
};

/// Ground-truth generator settings. The design has an intercept plus all but
/// the last topic (reference coding), so K equals the number of topics.
struct SyntheticSpec {
  int latent_dim = 2;
  std::vector<PartyBlueprint> parties;
  std::vector<BillClusterBlueprint> clusters;
  double a_mean = 0.0, a_sd = 0.5;
  double b_mean = 8.5, b_sd = 0.5;
  double gamma = 4.0;
  double missing_rate = 0.05;
  std::uint64_t seed = 1;
  AffinityTransform transform = AffinityTransform::ExpNegD;

  std::size_t n_legislators() const {
    std::size_t n = 0;
    for (const auto& p : parties) n += p.size;
    return n;
  }
  std::size_t n_bills() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.size;
    return n;
  }
  std::size_t n_topics() const { return clusters.empty() ? 0 : clusters.front().topic_concentration.size(); }
  std::size_t n_covariates() const { return n_topics(); }

  // 40 legislators in two large blocs plus a distinct minor party, 120 bills
  // in two clusters with contrasting topic profiles, S = 2, K = 4.
  static SyntheticSpec desk_default(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.seed = seed;
    s.parties = {{"P1", 17, {-1.4, -0.4}, 0.3}, {"P2", 17, {1.4, -0.4}, 0.3}, {"P3", 6, {0.0, 1.8}, 0.25}};
    s.clusters = {{60, {0.0, -0.7}, 1.0, {6.0, 3.0, 1.0, 1.0}}, {60, {0.0, 1.0}, 1.0, {1.0, 1.0, 3.0, 6.0}}};
    return s;
  }

  void validate() const {
    if (latent_dim < 1) throw ConfigError("synthetic: latent_dim must be >= 1");
    if (parties.empty() || clusters.empty()) throw ConfigError("synthetic: need at least one party and one bill cluster");
    for (const auto& p : parties) {
      if (p.size == 0) throw ConfigError("synthetic: party '" + p.label + "' is empty");
      if (p.centroid.size() != static_cast<std::size_t>(latent_dim)) throw ConfigError("synthetic: centroid dimension");
      if (!(p.spread >= 0.0)) throw ConfigError("synthetic: negative party spread");
    }
    const std::size_t topics = n_topics();
    if (topics < 2) throw ConfigError("synthetic: need at least two topics");
    for (const auto& c : clusters) {
      if (c.size == 0) throw ConfigError("synthetic: empty bill cluster");
      if (c.center.size() != static_cast<std::size_t>(latent_dim)) throw ConfigError("synthetic: cluster dimension");
      if (c.topic_concentration.size() != topics) throw ConfigError("synthetic: inconsistent topic profiles");
      for (double a : c.topic_concentration)
        if (!(a > 0.0)) throw ConfigError("synthetic: topic concentrations must be positive");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("synthetic: missing_rate must lie in [0,1)");
    if (!(gamma >= 0.0)) throw ConfigError("synthetic: gamma must be non-negative");
    if (!(a_sd >= 0.0 && b_sd >= 0.0)) throw ConfigError("synthetic: negative sd");
  }
};

struct SyntheticTruth {
  LsirmState lsirm;                // log_gamma = log(gamma); -inf when gamma = 0
  double gamma = 0.0;
  Eigen::MatrixXd distances;        // N x P
  Eigen::MatrixXd probabilities;    // N x P yea probabilities
  Eigen::MatrixXd affinities;       // N x P, under spec.transform
  RegressionState regression;       // beta-regression fit to the true affinities
  VoteMatrix complete_votes;        // before masking
};

struct SyntheticData {
  VoteMatrix votes;
  CovariateMatrix covariates;
  PartyRoster roster;
  SyntheticTruth truth;
};

namespace detail {

inline std::string padded_id(char prefix, std::size_t k, std::size_t total) {
  const int width = total >= 1000 ? 4 : 3;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, k + 1);
  return buf;
}

}  // namespace detail

/// Maximum-likelihood beta regression of each row of T on X with a shared
/// precision: Fisher scoring for the coefficients alternated with a 1-D
/// search over log phi.
inline RegressionState fit_beta_regression(const Eigen::MatrixXd& T, const CovariateMatrix& X, double eps = 1e-10) {
  using boost::math::digamma;
  using boost::math::trigamma;
  const Eigen::Index N = T.rows(), P = T.cols(), K = X.values().cols();
  const Eigen::MatrixXd& x = X.values();
  RegressionState reg;
  reg.B = Eigen::MatrixXd::Zero(N, K);
  reg.phi = 10.0;
  Eigen::MatrixXd ystar(N, P);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < P; ++j) {
      const double t = clamp_unit(T(i, j), eps);
      ystar(i, j) = std::log(t) - std::log1p(-t);
    }
  for (int round = 0; round < 25; ++round) {
    const double phi = reg.phi;
    for (Eigen::Index i = 0; i < N; ++i) {
      for (int it = 0; it < 25; ++it) {
        Eigen::VectorXd score = Eigen::VectorXd::Zero(K);
        Eigen::MatrixXd info = Eigen::MatrixXd::Zero(K, K);
        for (Eigen::Index j = 0; j < P; ++j) {
          const double mu = clamp_unit(logistic(x.row(j).dot(reg.B.row(i))), 1e-8);
          const double mustar = digamma(mu * phi) - digamma((1.0 - mu) * phi);
          const double dmu = mu * (1.0 - mu);
          score += phi * (ystar(i, j) - mustar) * dmu * x.row(j).transpose();
          const double w = phi * phi * (trigamma(mu * phi) + trigamma((1.0 - mu) * phi)) * dmu * dmu;
          info += w * x.row(j).transpose() * x.row(j);
        }
        const Eigen::VectorXd step = info.ldlt().solve(score);
        reg.B.row(i) += step.transpose();
        if (step.norm() < 1e-10) break;
      }
    }
    auto neg = [&](double log_phi) {
      RegressionState r = reg;
      r.phi = std::exp(log_phi);
      return -loglik_beta(T, X, r, true, eps);
    };
    const auto best = boost::math::tools::brent_find_minima(neg, std::log(1e-3), std::log(1e6), 40);
    const double next = std::exp(best.first);
    const bool converged = std::abs(std::log(next) - std::log(reg.phi)) < 1e-8;
    reg.phi = next;
    if (converged) break;
  }
  return reg;
}

/// Draws positions per blueprint, votes from the logistic distance model,
/// reference-coded topic covariates per bill cluster, then masks cells
/// uniformly at random. Uniforms for the votes are drawn in a fixed order
/// independent of gamma, so different gammas share random numbers.
inline SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t N = spec.n_legislators(), P = spec.n_bills(), T = spec.n_topics();
  const int S = spec.latent_dim;
  Rng rng(spec.seed, "simulate");

  std::vector<std::string> leg_ids, bill_ids;
  std::map<std::string, std::string> party;
  LsirmState truth;
  truth.Z.resize(static_cast<Eigen::Index>(N), S);
  truth.W.resize(static_cast<Eigen::Index>(P), S);
  std::size_t i = 0;
  for (const auto& p : spec.parties) {
    for (std::size_t m = 0; m < p.size; ++m, ++i) {
      leg_ids.push_back(detail::padded_id('L', i, N));
      party[leg_ids.back()] = p.label;
      for (int s = 0; s < S; ++s) truth.Z(static_cast<Eigen::Index>(i), s) = p.centroid[s] + p.spread * rng.normal();
    }
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(T));
  std::size_t j = 0;
  for (const auto& c : spec.clusters) {
    for (std::size_t m = 0; m < c.size; ++m, ++j) {
      bill_ids.push_back(detail::padded_id('B', j, P));
      for (int s = 0; s < S; ++s) truth.W(static_cast<Eigen::Index>(j), s) = c.center[s] + c.spread * rng.normal();
      std::vector<double> g(T);
      double total = 0.0;
      for (std::size_t k = 0; k < T; ++k) {
        g[k] = rng.gamma(c.topic_concentration[k], 1.0);
        total += g[k];
      }
      x(static_cast<Eigen::Index>(j), 0) = 1.0;
      for (std::size_t k = 0; k + 1 < T; ++k) x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k + 1)) = g[k] / total;
    }
  }
  truth.a.resize(static_cast<Eigen::Index>(N));
  truth.b.resize(static_cast<Eigen::Index>(P));
  for (std::size_t r = 0; r < N; ++r) truth.a(static_cast<Eigen::Index>(r)) = spec.a_mean + spec.a_sd * rng.normal();
  for (std::size_t c = 0; c < P; ++c) truth.b(static_cast<Eigen::Index>(c)) = spec.b_mean + spec.b_sd * rng.normal();
  truth.log_gamma = std::log(spec.gamma);
  truth.sigma2_a = spec.a_sd * spec.a_sd;
  truth.sigma2_b = spec.b_sd * spec.b_sd;

  SyntheticTruth out_truth;
  out_truth.gamma = spec.gamma;
  out_truth.distances = distance_matrix(truth);
  out_truth.probabilities.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(P));
  std::vector<Vote> complete(N * P), masked(N * P);
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t c = 0; c < P; ++c) {
      const double eta = truth.a(r) + truth.b(c) - spec.gamma * out_truth.distances(r, c);
      const double p = logistic(eta);
      out_truth.probabilities(r, c) = p;
      complete[r * P + c] = rng.uniform() < p ? Vote::Yea : Vote::NotYea;
    }
  }
  for (std::size_t c = 0; c < N * P; ++c) masked[c] = rng.uniform() < spec.missing_rate ? Vote::Missing : complete[c];

  std::vector<std::string> names{"intercept"};
  std::vector<bool> simplex{false};
  for (std::size_t k = 0; k + 1 < T; ++k) {
    names.push_back("topic_" + std::to_string(k + 1));
    simplex.push_back(true);
  }
  SyntheticData data{VoteMatrix(leg_ids, bill_ids, std::move(masked)),
                     CovariateMatrix(bill_ids, names, x, 0, simplex), PartyRoster(party), {}};
  out_truth.complete_votes = VoteMatrix(leg_ids, bill_ids, std::move(complete));
  out_truth.affinities = affinity_matrix(out_truth.distances, spec.transform);
  out_truth.regression = fit_beta_regression(out_truth.affinities, data.covariates);
  out_truth.lsirm = std::move(truth);
  data.truth = std::move(out_truth);
  return data;
}

// ---------------------------------------------------------------------------
// Brute-force joint log posterior. Written against raw arrays with no calls
// into the kernels above, so that agreement with joint_log_posterior is a
// meaningful check. Intended for tiny instances only.
// ---------------------------------------------------------------------------

namespace oracle {

inline std::vector<std::vector<double>> gauss_jordan_inverse(std::vector<std::vector<double>> m, double& det) {
  const std::size_t n = m.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n; ++r) inv[r][r] = 1.0;
  det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0) throw NumericError("oracle: singular matrix");
    if (piv != col) {
      std::swap(m[piv], m[col]);
      std::swap(inv[piv], inv[col]);
      det = -det;
    }
    const double d = m[col][col];
    det *= d;
    for (std::size_t c = 0; c < n; ++c) {
      m[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

}  // namespace oracle

inline double oracle_log_posterior(const LsirmState& ls, const RegressionState& reg, const VoteMatrix& votes,
                                   const CovariateMatrix& X, const ModelConfig& cfg,
                                   const ImputationOverlay* overlay = nullptr) {
  const double pi = 3.14159265358979323846;
  const std::size_t N = votes.n_legislators(), P = votes.n_bills();
  const std::size_t S = static_cast<std::size_t>(ls.Z.cols()), K = X.n_covariates();
  std::vector<std::vector<double>> z(N, std::vector<double>(S)), w(P, std::vector<double>(S));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t s = 0; s < S; ++s) z[i][s] = ls.Z(i, s);
  for (std::size_t j = 0; j < P; ++j)
    for (std::size_t s = 0; s < S; ++s) w[j][s] = ls.W(j, s);
  std::vector<std::vector<double>> dist(N, std::vector<double>(P));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < P; ++j) {
      double ss = 0.0;
      for (std::size_t s = 0; s < S; ++s) ss += (z[i][s] - w[j][s]) * (z[i][s] - w[j][s]);
      dist[i][j] = std::sqrt(ss);
    }
  const double gamma = std::exp(ls.log_gamma);

  double votes_term = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < P; ++j) {
      int y = -1;
      const Vote v = votes(i, j);
      if (v == Vote::Yea) y = 1;
      if (v == Vote::NotYea) y = 0;
      if (v == Vote::Missing && overlay)
        for (std::size_t k = 0; k < overlay->cells.size(); ++k)
          if (overlay->cells[k] == i * P + j) y = overlay->values[k];
      if (y < 0) continue;
      const double p = 1.0 / (1.0 + std::exp(-(ls.a(i) + ls.b(j) - gamma * dist[i][j])));
      votes_term += y == 1 ? std::log(p) : std::log(1.0 - p);
    }

  double beta_term = 0.0;
  if (cfg.beta_likelihood) {
    const double eps = cfg.affinity_epsilon;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < P; ++j) {
        const double d = dist[i][j];
        double t;
        switch (cfg.transform) {
          case AffinityTransform::ExpNegD: t = std::exp(-d); break;
          case AffinityTransform::ExpNegDSquared: t = std::exp(-d * d); break;
          default: t = 1.0 / (1.0 + d); break;
        }
        if (cfg.clamp_affinity) t = t < eps ? eps : (t > 1.0 - eps ? 1.0 - eps : t);
        double lin = 0.0;
        for (std::size_t k = 0; k < K; ++k) lin += X.values()(j, k) * reg.B(i, k);
        double mu = 1.0 / (1.0 + std::exp(-lin));
        mu = mu < eps ? eps : (mu > 1.0 - eps ? 1.0 - eps : mu);
        const double p = mu * reg.phi, q = (1.0 - mu) * reg.phi;
        beta_term += std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q) + (p - 1.0) * std::log(t) +
                     (q - 1.0) * std::log(1.0 - t);
      }
  }

  auto log_normal_density = [&](double x, double m, double var) {
    return -0.5 * std::log(2.0 * pi * var) - (x - m) * (x - m) / (2.0 * var);
  };
  double prior_ls = 0.0;
  for (std::size_t i = 0; i < N; ++i) prior_ls += log_normal_density(ls.a(i), 0.0, ls.sigma2_a);
  for (std::size_t j = 0; j < P; ++j) prior_ls += log_normal_density(ls.b(j), 0.0, ls.sigma2_b);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t s = 0; s < S; ++s) prior_ls += log_normal_density(z[i][s], 0.0, 1.0);
  for (std::size_t j = 0; j < P; ++j)
    for (std::size_t s = 0; s < S; ++s) prior_ls += log_normal_density(w[j][s], 0.0, 1.0);
  prior_ls += log_normal_density(ls.log_gamma, cfg.mu_gamma, cfg.sigma2_gamma);
  for (double v : {ls.sigma2_a, ls.sigma2_b}) {
    const double shape = cfg.a_sigma, rate = cfg.b_sigma;
    prior_ls += std::log(std::pow(rate, shape)) - std::lgamma(shape) - (shape + 1.0) * std::log(v) - rate / v;
  }

  // Covariance g (X'X)^{-1} (or sigma2_B I), inverted back for the quadratic form.
  std::vector<std::vector<double>> cov(K, std::vector<double>(K, 0.0));
  if (cfg.coefficient_prior == CoefficientPrior::Zellner) {
    std::vector<std::vector<double>> xtx(K, std::vector<double>(K, 0.0));
    for (std::size_t r = 0; r < K; ++r)
      for (std::size_t c = 0; c < K; ++c)
        for (std::size_t j = 0; j < P; ++j) xtx[r][c] += X.values()(j, r) * X.values()(j, c);
    double det_unused;
    const auto inv = oracle::gauss_jordan_inverse(xtx, det_unused);
    const double g = cfg.g > 0.0 ? cfg.g : static_cast<double>(P);
    for (std::size_t r = 0; r < K; ++r)
      for (std::size_t c = 0; c < K; ++c) cov[r][c] = g * inv[r][c];
  } else {
    for (std::size_t r = 0; r < K; ++r) cov[r][r] = cfg.sigma2_B;
  }
  double det_cov;
  const auto prec = oracle::gauss_jordan_inverse(cov, det_cov);
  double prior_reg = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double quad = 0.0;
    for (std::size_t r = 0; r < K; ++r)
      for (std::size_t c = 0; c < K; ++c) quad += reg.B(i, r) * prec[r][c] * reg.B(i, c);
    prior_reg += -0.5 * static_cast<double>(K) * std::log(2.0 * pi) - 0.5 * std::log(det_cov) - 0.5 * quad;
  }
  prior_reg += cfg.a_phi * std::log(cfg.b_phi) - std::lgamma(cfg.a_phi) + (cfg.a_phi - 1.0) * std::log(reg.phi) -
               cfg.b_phi * reg.phi;

  return votes_term + beta_term + prior_ls + prior_reg;
}

}  // namespace lsbeta
