#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lsbeta/beta_layer.hpp"
#include "lsbeta/config.hpp"
#include "lsbeta/covariates.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/lsirm.hpp"
#include "lsbeta/numerics.hpp"
#include "lsbeta/rng.hpp"
#include "lsbeta/votes.hpp"

namespace lsbeta {

enum class Block : int { A = 0, B, LogGamma, Z, W, Beta, LogPhi };
inline constexpr std::size_t kNumBlocks = 7;
inline constexpr std::array<const char*, kNumBlocks> kBlockNames = {"a", "b", "log_gamma", "z", "w", "beta", "log_phi"};

struct BlockCounts {
  std::array<long, kNumBlocks> proposed{};
  std::array<long, kNumBlocks> accepted{};
  std::array<long, kNumBlocks> nonfinite{};

  void add(Block b, bool accepted_move, bool nonfinite_ratio) {
    const auto k = static_cast<std::size_t>(b);
    ++proposed[k];
    accepted[k] += accepted_move;
    nonfinite[k] += nonfinite_ratio;
  }
  void merge(const BlockCounts& o) {
    for (std::size_t k = 0; k < kNumBlocks; ++k) {
      proposed[k] += o.proposed[k];
      accepted[k] += o.accepted[k];
      nonfinite[k] += o.nonfinite[k];
    }
  }
  double rate(Block b) const {
    const auto k = static_cast<std::size_t>(b);
    return proposed[k] > 0 ? static_cast<double>(accepted[k]) / static_cast<double>(proposed[k]) : 0.0;
  }
};

struct MoveOutcome {
  double log_u = 0.0;
  double log_ratio = 0.0;     // includes the Hastings term
  double log_hastings = 0.0;
  bool accepted = false;
  bool nonfinite = false;
};

// Always consumes exactly one uniform so the stream does not depend on ratios.
inline MoveOutcome mh_decide(double log_ratio, double log_hastings, Rng& rng) {
  MoveOutcome m;
  m.log_u = std::log(rng.uniform_open());
  m.log_ratio = log_ratio;
  m.log_hastings = log_hastings;
  if (!std::isfinite(log_ratio)) {
    m.nonfinite = true;
    return m;
  }
  m.accepted = m.log_u < log_ratio;
  return m;
}

/// One proposal with the states on both sides of it, reported to an observer
/// for post-hoc auditing. `*_after` is the proposed state whether or not it
/// was accepted.
struct MoveRecord {
  Block block;
  std::size_t index;
  MoveOutcome outcome;
  LsirmState ls_before, ls_after;
  RegressionState reg_before, reg_after;
  ImputationOverlay overlay;
};

using MoveObserver = std::function<void(const MoveRecord&)>;

/// Cached beta-regression layer: per-cell log affinities, fitted means and
/// log-gamma normalizers, with the random-walk updates of beta_i and phi.
class BetaLayerKernel {
 public:
  BetaLayerKernel(const CovariateMatrix& X, const ModelConfig& cfg, std::size_t n_legislators)
      : X_(X), cfg_(cfg), prior_(X, cfg), N_(static_cast<Eigen::Index>(n_legislators)),
        P_(static_cast<Eigen::Index>(X.n_bills())) {
    log_t_.setZero(N_, P_);
    log_1mt_.setZero(N_, P_);
    mu_.setZero(N_, P_);
    norm_.setZero(N_, P_);
  }

  const RegressionPrior& prior() const { return prior_; }
  const RegressionState& state() const { return reg_; }

  void set_state(const RegressionState& reg) {
    reg_ = reg;
    for (Eigen::Index i = 0; i < N_; ++i) refresh_row_mean(i);
  }

  void set_affinities(const Eigen::MatrixXd& T) {
    for (Eigen::Index i = 0; i < N_; ++i)
      for (Eigen::Index j = 0; j < P_; ++j) set_affinity(i, j, T(i, j));
  }

  void set_affinity(Eigen::Index i, Eigen::Index j, double t) {
    const double tc = transformed(t);
    log_t_(i, j) = std::log(tc);
    log_1mt_(i, j) = std::log1p(-tc);
  }

  double transformed(double t) const { return cfg_.clamp_affinity ? clamp_unit(t, cfg_.affinity_epsilon) : t; }

  // Change in the (i, j) beta log-density when its affinity becomes t.
  double delta_affinity(Eigen::Index i, Eigen::Index j, double t) const {
    const double tc = transformed(t);
    const double p = mu_(i, j) * reg_.phi, q = (1.0 - mu_(i, j)) * reg_.phi;
    return (p - 1.0) * (std::log(tc) - log_t_(i, j)) + (q - 1.0) * (std::log1p(-tc) - log_1mt_(i, j));
  }

  double cell_loglik(Eigen::Index i, Eigen::Index j) const {
    const double p = mu_(i, j) * reg_.phi, q = (1.0 - mu_(i, j)) * reg_.phi;
    return norm_(i, j) + (p - 1.0) * log_t_(i, j) + (q - 1.0) * log_1mt_(i, j);
  }

  double loglik() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < N_; ++i)
      for (Eigen::Index j = 0; j < P_; ++j) s += cell_loglik(i, j);
    return s;
  }

  // Random-walk Metropolis on beta_i preconditioned by chol((X'X)^{-1}).
  MoveOutcome update_row(Eigen::Index i, double scale, Rng& rng, bool use_likelihood,
                         Eigen::VectorXd* proposed_out = nullptr) {
    const Eigen::Index K = reg_.B.cols();
    Eigen::VectorXd eps(K);
    for (Eigen::Index k = 0; k < K; ++k) eps(k) = rng.normal();
    const Eigen::VectorXd current = reg_.B.row(i).transpose();
    const Eigen::VectorXd proposal = current + scale * (prior_.proposal_factor() * eps);
    if (proposed_out) *proposed_out = proposal;
    double delta = prior_.log_density(proposal) - prior_.log_density(current);
    std::vector<double> mu_new(static_cast<std::size_t>(P_)), norm_new(static_cast<std::size_t>(P_));
    if (use_likelihood) {
      const Eigen::VectorXd eta = X_.values() * proposal;
      const double phi = reg_.phi, lg_phi = std::lgamma(phi);
      for (Eigen::Index j = 0; j < P_; ++j) {
        const double mu = clamp_unit(logistic(eta(j)), cfg_.affinity_epsilon);
        const double p = mu * phi, q = (1.0 - mu) * phi;
        const double nrm = lg_phi - std::lgamma(p) - std::lgamma(q);
        mu_new[j] = mu;
        norm_new[j] = nrm;
        delta += nrm + (p - 1.0) * log_t_(i, j) + (q - 1.0) * log_1mt_(i, j) - cell_loglik(i, j);
      }
    }
    const MoveOutcome m = mh_decide(delta, 0.0, rng);
    if (m.accepted) {
      reg_.B.row(i) = proposal.transpose();
      if (use_likelihood) {
        for (Eigen::Index j = 0; j < P_; ++j) {
          mu_(i, j) = mu_new[j];
          norm_(i, j) = norm_new[j];
        }
      } else {
        refresh_row_mean(i);
      }
    }
    return m;
  }

  // Log-normal random walk on phi; the Hastings term is log(phi'/phi).
  MoveOutcome update_phi(double scale, Rng& rng, bool use_likelihood, double* proposed_out = nullptr) {
    const double step = scale * rng.normal();
    const double phi_new = reg_.phi * std::exp(step);
    if (proposed_out) *proposed_out = phi_new;
    double delta = logprior_phi(phi_new, cfg_) - logprior_phi(reg_.phi, cfg_);
    Eigen::MatrixXd norm_new;
    if (use_likelihood) {
      norm_new.resize(N_, P_);
      const double lg_phi = std::lgamma(phi_new);
      for (Eigen::Index i = 0; i < N_; ++i) {
        for (Eigen::Index j = 0; j < P_; ++j) {
          const double p = mu_(i, j) * phi_new, q = (1.0 - mu_(i, j)) * phi_new;
          norm_new(i, j) = lg_phi - std::lgamma(p) - std::lgamma(q);
          delta += norm_new(i, j) + (p - 1.0) * log_t_(i, j) + (q - 1.0) * log_1mt_(i, j) - cell_loglik(i, j);
        }
      }
    }
    const double log_hastings = std::log(phi_new) - std::log(reg_.phi);
    const MoveOutcome m = mh_decide(delta + log_hastings, log_hastings, rng);
    if (m.accepted) {
      reg_.phi = phi_new;
      if (use_likelihood) {
        norm_ = std::move(norm_new);
      } else {
        for (Eigen::Index i = 0; i < N_; ++i) refresh_row_mean(i);
      }
    }
    return m;
  }

 private:
  void refresh_row_mean(Eigen::Index i) {
    const Eigen::VectorXd eta = X_.values() * reg_.B.row(i).transpose();
    const double lg_phi = std::lgamma(reg_.phi);
    for (Eigen::Index j = 0; j < P_; ++j) {
      const double mu = clamp_unit(logistic(eta(j)), cfg_.affinity_epsilon);
      mu_(i, j) = mu;
      norm_(i, j) = lg_phi - std::lgamma(mu * reg_.phi) - std::lgamma((1.0 - mu) * reg_.phi);
    }
  }

  const CovariateMatrix& X_;
  const ModelConfig& cfg_;
  RegressionPrior prior_;
  Eigen::Index N_, P_;
  RegressionState reg_;
  Eigen::MatrixXd log_t_, log_1mt_, mu_, norm_;
};

/// Unnormalized joint log posterior: roll-call likelihood + beta likelihood of
/// the transformed distances + both prior blocks.
inline double joint_log_posterior(const LsirmState& ls, const RegressionState& reg, const VoteMatrix& votes,
                                  const CovariateMatrix& X, const ModelConfig& cfg,
                                  const ImputationOverlay* overlay = nullptr) {
  const double lv = loglik_votes(ls, votes, overlay);
  const double lb = cfg.beta_likelihood
                        ? loglik_beta(affinity_matrix(ls, cfg.transform), X, reg, cfg.clamp_affinity,
                                      cfg.affinity_epsilon)
                        : 0.0;
  const double pl = logprior_lsirm(ls, cfg);
  const double pr = logprior_regression(reg, X, cfg);
  if (!std::isfinite(lv)) throw NumericError("joint log posterior: non-finite roll-call likelihood");
  if (!std::isfinite(lb)) throw NumericError("joint log posterior: non-finite beta likelihood");
  if (!std::isfinite(pl)) throw NumericError("joint log posterior: non-finite LSIRM prior");
  if (!std::isfinite(pr)) throw NumericError("joint log posterior: non-finite regression prior");
  return lv + lb + pl + pr;
}

/// Starting point: intercepts at logits of the observed marginal yea rates,
/// standard normal positions, gamma = 1, beta = 0, phi = 10.
inline std::pair<LsirmState, RegressionState> initial_state(const VoteMatrix& votes, const CovariateMatrix& X,
                                                            const ModelConfig& cfg) {
  const auto N = static_cast<Eigen::Index>(votes.n_legislators());
  const auto P = static_cast<Eigen::Index>(votes.n_bills());
  const int S = cfg.latent_dim;
  Rng rng(cfg.seed, "init");
  LsirmState ls;
  ls.a.resize(N);
  ls.b.resize(P);
  auto rate_logit = [](std::size_t yea, std::size_t seen) {
    const double r = seen == 0 ? 0.5 : static_cast<double>(yea) / static_cast<double>(seen);
    return logit(std::min(std::max(r, 0.02), 0.98));
  };
  for (Eigen::Index i = 0; i < N; ++i) {
    std::size_t yea = 0, seen = 0;
    for (Eigen::Index j = 0; j < P; ++j) {
      const Vote v = votes(i, j);
      if (v == Vote::Missing) continue;
      ++seen;
      yea += v == Vote::Yea;
    }
    ls.a(i) = rate_logit(yea, seen);
  }
  for (Eigen::Index j = 0; j < P; ++j) {
    std::size_t yea = 0, seen = 0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vote v = votes(i, j);
      if (v == Vote::Missing) continue;
      ++seen;
      yea += v == Vote::Yea;
    }
    ls.b(j) = rate_logit(yea, seen);
  }
  ls.Z.resize(N, S);
  ls.W.resize(P, S);
  for (Eigen::Index i = 0; i < N; ++i)
    for (int s = 0; s < S; ++s) ls.Z(i, s) = rng.normal();
  for (Eigen::Index j = 0; j < P; ++j)
    for (int s = 0; s < S; ++s) ls.W(j, s) = rng.normal();
  ls.log_gamma = 0.0;
  ls.sigma2_a = 1.0;
  ls.sigma2_b = 1.0;
  RegressionState reg;
  reg.B = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(X.n_covariates()));
  reg.phi = 10.0;
  return {ls, reg};
}

/// Metropolis-Hastings-within-Gibbs sampler over the joint posterior. One call
/// to step() performs a full sweep in fixed order: impute missing votes;
/// random-walk updates of a, b, log gamma, each z_i, each w_j; refresh the
/// affinities; update each beta_i; update phi; conjugate draws of sigma2_a and
/// sigma2_b.
class OneStageSampler {
 public:
  OneStageSampler(const VoteMatrix& votes, const CovariateMatrix& X, const ModelConfig& cfg, LsirmState ls,
                  RegressionState reg)
      : votes_(votes), X_(X), cfg_(cfg), beta_(X, cfg_, votes.n_legislators()), ls_(std::move(ls)),
        scales_(cfg.scales), rng_(cfg.seed, "fit"), impute_rng_(cfg.seed, "impute") {
    cfg_.validate();
    N_ = static_cast<Eigen::Index>(votes.n_legislators());
    P_ = static_cast<Eigen::Index>(votes.n_bills());
    if (X.n_bills() != votes.n_bills() || X.bill_ids() != votes.bill_ids())
      throw DataError("covariate rows are not aligned with the vote matrix bills");
    ls_.validate();
    reg.validate();
    if (ls_.n_legislators() != votes.n_legislators() || ls_.n_bills() != votes.n_bills() ||
        reg.B.rows() != N_ || static_cast<std::size_t>(reg.B.cols()) != X.n_covariates())
      throw ConfigError("initial state does not match the data dimensions");
    y_.assign(static_cast<std::size_t>(N_ * P_), -1);
    for (Eigen::Index i = 0; i < N_; ++i) {
      for (Eigen::Index j = 0; j < P_; ++j) {
        const Vote v = votes(i, j);
        const auto c = static_cast<std::size_t>(i * P_ + j);
        if (v == Vote::Missing) {
          missing_.push_back(c);
        } else {
          y_[c] = v == Vote::Yea ? 1 : 0;
        }
      }
    }
    D_ = distance_matrix(ls_);
    beta_.set_affinities(affinity_matrix(D_, cfg_.transform));
    beta_.set_state(reg);
  }

  const LsirmState& lsirm() const { return ls_; }
  const RegressionState& regression() const { return beta_.state(); }
  const ImputationOverlay& overlay() const { return overlay_; }
  const ProposalScales& scales() const { return scales_; }
  long iteration() const { return iter_; }
  void set_observer(MoveObserver obs) { observer_ = std::move(obs); }

  BlockCounts step() {
    BlockCounts counts;
    impute();
    update_intercepts_a(counts);
    update_intercepts_b(counts);
    update_log_gamma(counts);
    update_positions_z(counts);
    update_positions_w(counts);
    // affinities are refreshed incrementally on every accepted z/w move
    update_coefficients(counts);
    update_precision(counts);
    update_variances();
    if (cfg_.adapt && iter_ < cfg_.burn_in) adapt(counts);
    ++iter_;
    return counts;
  }

 private:
  double cell_vote_ll(Eigen::Index i, Eigen::Index j, double a, double b, double gamma, double d) const {
    const std::int8_t y = y_[static_cast<std::size_t>(i * P_ + j)];
    if (y < 0) return 0.0;
    return bernoulli_logit_logpmf(y == 1, a + b - gamma * d);
  }

  void impute() {
    overlay_.cells.clear();
    overlay_.values.clear();
    if (!cfg_.impute_missing) return;
    const double gamma = ls_.gamma();
    for (std::size_t c : missing_) {
      const auto i = static_cast<Eigen::Index>(c) / P_, j = static_cast<Eigen::Index>(c) % P_;
      const double p = logistic(ls_.a(i) + ls_.b(j) - gamma * D_(i, j));
      const std::uint8_t y = impute_rng_.uniform() < p ? 1 : 0;
      y_[c] = static_cast<std::int8_t>(y);
      overlay_.cells.push_back(c);
      overlay_.values.push_back(y);
    }
  }

  void report(Block block, std::size_t index, const MoveOutcome& m, const LsirmState& ls_after,
              const RegressionState& reg_after) {
    if (!observer_) return;
    MoveRecord rec{block, index, m, ls_, ls_after, beta_.state(), reg_after, overlay_};
    observer_(rec);
  }

  void update_intercepts_a(BlockCounts& counts) {
    if (scales_.a <= 0.0) return;
    const double gamma = ls_.gamma();
    for (Eigen::Index i = 0; i < N_; ++i) {
      const double cur = ls_.a(i), prop = cur + scales_.a * rng_.normal();
      double delta = detail::normal_logpdf(prop, 0.0, ls_.sigma2_a) - detail::normal_logpdf(cur, 0.0, ls_.sigma2_a);
      for (Eigen::Index j = 0; j < P_; ++j)
        delta += cell_vote_ll(i, j, prop, ls_.b(j), gamma, D_(i, j)) - cell_vote_ll(i, j, cur, ls_.b(j), gamma, D_(i, j));
      const MoveOutcome m = mh_decide(delta, 0.0, rng_);
      if (observer_) {
        LsirmState after = ls_;
        after.a(i) = prop;
        report(Block::A, static_cast<std::size_t>(i), m, after, beta_.state());
      }
      counts.add(Block::A, m.accepted, m.nonfinite);
      if (m.accepted) ls_.a(i) = prop;
    }
  }

  void update_intercepts_b(BlockCounts& counts) {
    if (scales_.b <= 0.0) return;
    const double gamma = ls_.gamma();
    for (Eigen::Index j = 0; j < P_; ++j) {
      const double cur = ls_.b(j), prop = cur + scales_.b * rng_.normal();
      double delta = detail::normal_logpdf(prop, 0.0, ls_.sigma2_b) - detail::normal_logpdf(cur, 0.0, ls_.sigma2_b);
      for (Eigen::Index i = 0; i < N_; ++i)
        delta += cell_vote_ll(i, j, ls_.a(i), prop, gamma, D_(i, j)) - cell_vote_ll(i, j, ls_.a(i), cur, gamma, D_(i, j));
      const MoveOutcome m = mh_decide(delta, 0.0, rng_);
      if (observer_) {
        LsirmState after = ls_;
        after.b(j) = prop;
        report(Block::B, static_cast<std::size_t>(j), m, after, beta_.state());
      }
      counts.add(Block::B, m.accepted, m.nonfinite);
      if (m.accepted) ls_.b(j) = prop;
    }
  }

  void update_log_gamma(BlockCounts& counts) {
    if (scales_.log_gamma <= 0.0) return;
    const double cur = ls_.log_gamma, prop = cur + scales_.log_gamma * rng_.normal();
    const double g0 = std::exp(cur), g1 = std::exp(prop);
    double delta = detail::normal_logpdf(prop, cfg_.mu_gamma, cfg_.sigma2_gamma) -
                   detail::normal_logpdf(cur, cfg_.mu_gamma, cfg_.sigma2_gamma);
    for (Eigen::Index i = 0; i < N_; ++i)
      for (Eigen::Index j = 0; j < P_; ++j)
        delta += cell_vote_ll(i, j, ls_.a(i), ls_.b(j), g1, D_(i, j)) - cell_vote_ll(i, j, ls_.a(i), ls_.b(j), g0, D_(i, j));
    const MoveOutcome m = mh_decide(delta, 0.0, rng_);
    if (observer_) {
      LsirmState after = ls_;
      after.log_gamma = prop;
      report(Block::LogGamma, 0, m, after, beta_.state());
    }
    counts.add(Block::LogGamma, m.accepted, m.nonfinite);
    if (m.accepted) ls_.log_gamma = prop;
  }

  bool beta_in_positions() const { return cfg_.beta_likelihood && !cfg_.cut_feedback; }

  void update_positions_z(BlockCounts& counts) {
    if (scales_.z <= 0.0) return;
    const Eigen::Index S = ls_.Z.cols();
    const double gamma = ls_.gamma();
    Eigen::RowVectorXd prop(S);
    std::vector<double> d_new(static_cast<std::size_t>(P_)), t_new(static_cast<std::size_t>(P_));
    for (Eigen::Index i = 0; i < N_; ++i) {
      for (Eigen::Index s = 0; s < S; ++s) prop(s) = ls_.Z(i, s) + scales_.z * rng_.normal();
      double delta = -0.5 * (prop.squaredNorm() - ls_.Z.row(i).squaredNorm());
      for (Eigen::Index j = 0; j < P_; ++j) {
        const double d = (prop - ls_.W.row(j)).norm();
        d_new[j] = d;
        delta += cell_vote_ll(i, j, ls_.a(i), ls_.b(j), gamma, d) - cell_vote_ll(i, j, ls_.a(i), ls_.b(j), gamma, D_(i, j));
        if (beta_in_positions()) {
          t_new[j] = affinity(cfg_.transform, d);
          delta += beta_.delta_affinity(i, j, t_new[j]);
        }
      }
      const MoveOutcome m = mh_decide(delta, 0.0, rng_);
      if (observer_) {
        LsirmState after = ls_;
        after.Z.row(i) = prop;
        report(Block::Z, static_cast<std::size_t>(i), m, after, beta_.state());
      }
      counts.add(Block::Z, m.accepted, m.nonfinite);
      if (m.accepted) {
        ls_.Z.row(i) = prop;
        for (Eigen::Index j = 0; j < P_; ++j) {
          D_(i, j) = d_new[j];
          beta_.set_affinity(i, j, affinity(cfg_.transform, d_new[j]));
        }
      }
    }
  }

  void update_positions_w(BlockCounts& counts) {
    if (scales_.w <= 0.0) return;
    const Eigen::Index S = ls_.W.cols();
    const double gamma = ls_.gamma();
    Eigen::RowVectorXd prop(S);
    std::vector<double> d_new(static_cast<std::size_t>(N_));
    for (Eigen::Index j = 0; j < P_; ++j) {
      for (Eigen::Index s = 0; s < S; ++s) prop(s) = ls_.W(j, s) + scales_.w * rng_.normal();
      double delta = -0.5 * (prop.squaredNorm() - ls_.W.row(j).squaredNorm());
      for (Eigen::Index i = 0; i < N_; ++i) {
        const double d = (ls_.Z.row(i) - prop).norm();
        d_new[i] = d;
        delta += cell_vote_ll(i, j, ls_.a(i), ls_.b(j), gamma, d) - cell_vote_ll(i, j, ls_.a(i), ls_.b(j), gamma, D_(i, j));
        if (beta_in_positions()) delta += beta_.delta_affinity(i, j, affinity(cfg_.transform, d));
      }
      const MoveOutcome m = mh_decide(delta, 0.0, rng_);
      if (observer_) {
        LsirmState after = ls_;
        after.W.row(j) = prop;
        report(Block::W, static_cast<std::size_t>(j), m, after, beta_.state());
      }
      counts.add(Block::W, m.accepted, m.nonfinite);
      if (m.accepted) {
        ls_.W.row(j) = prop;
        for (Eigen::Index i = 0; i < N_; ++i) {
          D_(i, j) = d_new[i];
          beta_.set_affinity(i, j, affinity(cfg_.transform, d_new[i]));
        }
      }
    }
  }

  void update_coefficients(BlockCounts& counts) {
    if (scales_.beta <= 0.0) return;
    Eigen::VectorXd proposal;
    for (Eigen::Index i = 0; i < N_; ++i) {
      const RegressionState before = observer_ ? beta_.state() : RegressionState{};
      const MoveOutcome m = beta_.update_row(i, scales_.beta, rng_, cfg_.beta_likelihood, &proposal);
      if (observer_) {
        RegressionState after = before;
        after.B.row(i) = proposal.transpose();
        MoveRecord rec{Block::Beta, static_cast<std::size_t>(i), m, ls_, ls_, before, after, overlay_};
        observer_(rec);
      }
      counts.add(Block::Beta, m.accepted, m.nonfinite);
    }
  }

  void update_precision(BlockCounts& counts) {
    if (scales_.log_phi <= 0.0) return;
    const RegressionState before = observer_ ? beta_.state() : RegressionState{};
    double proposal = 0.0;
    const MoveOutcome m = beta_.update_phi(scales_.log_phi, rng_, cfg_.beta_likelihood, &proposal);
    if (observer_) {
      RegressionState after = before;
      after.phi = proposal;
      MoveRecord rec{Block::LogPhi, 0, m, ls_, ls_, before, after, overlay_};
      observer_(rec);
    }
    counts.add(Block::LogPhi, m.accepted, m.nonfinite);
  }

  void update_variances() {
    const double ssa = ls_.a.squaredNorm(), ssb = ls_.b.squaredNorm();
    ls_.sigma2_a = rng_.inverse_gamma(cfg_.a_sigma + 0.5 * static_cast<double>(N_), cfg_.b_sigma + 0.5 * ssa);
    ls_.sigma2_b = rng_.inverse_gamma(cfg_.a_sigma + 0.5 * static_cast<double>(P_), cfg_.b_sigma + 0.5 * ssb);
  }

  // Robbins-Monro on log step sizes; only called during burn-in.
  void adapt(const BlockCounts& counts) {
    const double gain = 1.0 / std::pow(static_cast<double>(iter_) + 1.0, 0.6);
    const bool vector_positions = ls_.Z.cols() > 1;
    auto tune = [&](double& scale, Block b, bool multivariate) {
      const auto k = static_cast<std::size_t>(b);
      if (scale <= 0.0 || counts.proposed[k] == 0) return;
      const double target = multivariate ? cfg_.target_accept_block : cfg_.target_accept_scalar;
      const double next = std::log(scale) + gain * (counts.rate(b) - target);
      scale = std::exp(std::min(std::max(next, std::log(1e-5)), std::log(50.0)));
    };
    tune(scales_.a, Block::A, false);
    tune(scales_.b, Block::B, false);
    tune(scales_.log_gamma, Block::LogGamma, false);
    tune(scales_.z, Block::Z, vector_positions);
    tune(scales_.w, Block::W, vector_positions);
    tune(scales_.beta, Block::Beta, true);
    tune(scales_.log_phi, Block::LogPhi, false);
  }

  const VoteMatrix& votes_;
  const CovariateMatrix& X_;
  ModelConfig cfg_;
  BetaLayerKernel beta_;
  LsirmState ls_;
  ProposalScales scales_;
  Rng rng_;
  Rng impute_rng_;
  Eigen::Index N_ = 0, P_ = 0;
  std::vector<std::int8_t> y_;
  std::vector<std::size_t> missing_;
  Eigen::MatrixXd D_;
  ImputationOverlay overlay_;
  MoveObserver observer_;
  long iter_ = 0;
};

/// Thinned post-burn-in draws with run diagnostics.
struct ChainOutput {
  std::vector<LsirmState> lsirm;
  std::vector<RegressionState> regression;
  std::vector<double> log_posterior;
  std::array<double, kNumBlocks> acceptance_rates{};
  long nonfinite_rejections = 0;
  ProposalScales final_scales;
  std::uint64_t seed = 0;
  std::uint64_t imputation_seed = 0;
  int latent_dim = 0;
  AffinityTransform transform = AffinityTransform::ExpNegD;
  std::vector<std::string> legislator_ids;
  std::vector<std::string> bill_ids;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return lsirm.size(); }
  bool empty() const { return lsirm.empty(); }
};

inline std::size_t expected_draws(const ModelConfig& cfg) {
  return static_cast<std::size_t>((cfg.iterations - cfg.burn_in) / cfg.thin);
}

/// Runs the one-stage sampler from the default starting point. Deterministic
/// given the configuration (including its seed).
inline ChainOutput run(const VoteMatrix& votes, const CovariateMatrix& X, const ModelConfig& cfg,
                       const MoveObserver& observer = {}) {
  cfg.validate();
  auto [ls0, reg0] = initial_state(votes, X, cfg);
  OneStageSampler sampler(votes, X, cfg, std::move(ls0), std::move(reg0));
  if (observer) sampler.set_observer(observer);

  ChainOutput out;
  out.seed = cfg.seed;
  out.imputation_seed = substream_seed(cfg.seed, "impute");
  out.latent_dim = cfg.latent_dim;
  out.transform = cfg.transform;
  out.legislator_ids = votes.legislator_ids();
  out.bill_ids = votes.bill_ids();
  out.covariate_names = X.column_names();
  const std::size_t n_store = expected_draws(cfg);
  out.lsirm.reserve(n_store);
  out.regression.reserve(n_store);
  out.log_posterior.reserve(n_store);

  BlockCounts kept;
  for (long t = 0; t < cfg.iterations; ++t) {
    BlockCounts c;
    try {
      c = sampler.step();
    } catch (const Error& e) {
      throw NumericError("iteration " + std::to_string(t) + ": " + e.what());
    }
    for (long r : c.nonfinite) out.nonfinite_rejections += r;
    if (t < cfg.burn_in) continue;
    kept.merge(c);
    if ((t - cfg.burn_in + 1) % cfg.thin == 0 && out.lsirm.size() < n_store) {
      out.lsirm.push_back(sampler.lsirm());
      out.regression.push_back(sampler.regression());
      try {
        out.log_posterior.push_back(joint_log_posterior(sampler.lsirm(), sampler.regression(), votes, X, cfg));
      } catch (const Error& e) {
        throw NumericError("iteration " + std::to_string(t) + ": " + e.what());
      }
    }
  }
  for (std::size_t k = 0; k < kNumBlocks; ++k) out.acceptance_rates[k] = kept.rate(static_cast<Block>(k));
  out.final_scales = sampler.scales();
  return out;
}

}  // namespace lsbeta
