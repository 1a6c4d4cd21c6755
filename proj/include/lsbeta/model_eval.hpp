#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lsbeta/beta_layer.hpp"
#include "lsbeta/covariates.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/lsirm.hpp"
#include "lsbeta/numerics.hpp"
#include "lsbeta/postprocess.hpp"
#include "lsbeta/rng.hpp"
#include "lsbeta/sampler.hpp"
#include "lsbeta/votes.hpp"

namespace lsbeta {

// ---------------------------------------------------------------------------
// Information criteria (roll-call likelihood only)
// ---------------------------------------------------------------------------

struct CriteriaRow {
  int latent_dim = 0;
  std::size_t n_draws = 0;
  std::size_t n_obs = 0;
  long n_params = 0;
  double max_loglik = 0.0;
  double mean_loglik = 0.0;
  double loglik_at_mean = 0.0;
  double bic = 0.0;
  double p_dic = 0.0;
  double dic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
  double waic = 0.0;
};

using CriteriaReport = std::vector<CriteriaRow>;

inline long default_param_count(std::size_t N, std::size_t P, int S) {
  return static_cast<long>(N + P + 1 + static_cast<std::size_t>(S) * (N + P) + 2);
}

/// Posterior-mean parameters; positions are averaged after alignment.
inline LsirmState posterior_mean_state(const AlignedChain& aligned) {
  const auto& draws = aligned.chain.lsirm;
  LsirmState m = draws.front();
  m.a.setZero();
  m.b.setZero();
  m.Z.setZero();
  m.W.setZero();
  double gamma = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& s : draws) {
    m.a += s.a;
    m.b += s.b;
    m.Z += s.Z;
    m.W += s.W;
    gamma += s.gamma();
    sa += s.sigma2_a;
    sb += s.sigma2_b;
  }
  const double L = static_cast<double>(draws.size());
  m.a /= L;
  m.b /= L;
  m.Z /= L;
  m.W /= L;
  m.log_gamma = std::log(gamma / L);
  m.sigma2_a = sa / L;
  m.sigma2_b = sb / L;
  return m;
}

/// BIC, DIC and WAIC of the roll-call likelihood over the stored draws.
inline CriteriaRow information_criteria(const ChainOutput& chain, const VoteMatrix& votes, const ModelConfig& cfg) {
  if (chain.size() < 2) throw ConfigError("information criteria need at least 2 draws (WAIC variance undefined)");
  const std::size_t N = votes.n_legislators(), P = votes.n_bills();
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < P; ++j)
      if (!votes.missing(i, j)) cells.push_back(i * P + j);

  CriteriaRow row;
  row.latent_dim = chain.latent_dim;
  row.n_draws = chain.size();
  row.n_obs = cells.size();
  row.n_params = cfg.bic_param_count > 0 ? cfg.bic_param_count : default_param_count(N, P, chain.latent_dim);

  std::vector<LogSumExp> lse(cells.size());
  std::vector<RunningMoments> moments(cells.size());
  row.max_loglik = -HUGE_VAL;
  double sum_ll = 0.0;
  for (const auto& s : chain.lsirm) {
    double ll = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t i = cells[c] / P, j = cells[c] % P;
      const double v = bernoulli_logit_logpmf(votes(i, j) == Vote::Yea, linear_predictor(s, i, j));
      lse[c].add(v);
      moments[c].add(v);
      ll += v;
    }
    row.max_loglik = std::max(row.max_loglik, ll);
    sum_ll += ll;
  }
  const double L = static_cast<double>(chain.size());
  row.mean_loglik = sum_ll / L;

  const LsirmState mean_state = posterior_mean_state(procrustes_align(chain));
  row.loglik_at_mean = loglik_votes(mean_state, votes);

  const double n_obs = static_cast<double>(cfg.bic_n_obs > 0 ? static_cast<std::size_t>(cfg.bic_n_obs) : row.n_obs);
  row.bic = -2.0 * row.max_loglik + static_cast<double>(row.n_params) * std::log(n_obs);
  row.p_dic = 2.0 * (row.loglik_at_mean - row.mean_loglik);
  row.dic = -2.0 * row.loglik_at_mean + 2.0 * row.p_dic;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    row.lppd += lse[c].value() - std::log(L);
    row.p_waic += moments[c].variance();
  }
  row.waic = -2.0 * (row.lppd - row.p_waic);
  return row;
}

// ---------------------------------------------------------------------------
// Posterior predictive checks
// ---------------------------------------------------------------------------

/// `n` indices spread evenly over [0, L).
inline std::vector<std::size_t> evenly_spaced(std::size_t L, std::size_t n) {
  std::vector<std::size_t> idx;
  if (L == 0 || n == 0) return idx;
  n = std::min(n, L);
  if (n == 1) return {L - 1};
  for (std::size_t k = 0; k < n; ++k)
    idx.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(L - 1) /
                                                        static_cast<double>(n - 1))));
  return idx;
}

struct PredictiveInterval {
  double observed = 0.0;
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  bool covered = false;
};

inline PredictiveInterval predictive_interval(double observed, std::vector<double> replicates, double level = 0.95) {
  std::sort(replicates.begin(), replicates.end());
  const double tail = 0.5 * (1.0 - level);
  PredictiveInterval pi;
  pi.observed = observed;
  pi.lower = quantile_sorted(replicates, tail);
  pi.median = quantile_sorted(replicates, 0.5);
  pi.upper = quantile_sorted(replicates, 1.0 - tail);
  pi.covered = observed >= pi.lower && observed <= pi.upper;
  return pi;
}

inline double coverage_fraction(const std::vector<PredictiveInterval>& v) {
  if (v.empty()) return kUndefined;
  std::size_t c = 0;
  for (const auto& p : v) c += p.covered;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

/// Two-sided Monte Carlo predictive p-value; ties count in both tails and the
/// result is capped at 1.
inline double two_sided_ppp(std::size_t n_ge, std::size_t n_le, std::size_t n) {
  if (n == 0) return kUndefined;
  const double ge = static_cast<double>(n_ge) / static_cast<double>(n);
  const double le = static_cast<double>(n_le) / static_cast<double>(n);
  return std::min(1.0, 2.0 * std::min(ge, le));
}

struct LsirmPpc {
  std::size_t n_draws = 0;
  std::size_t n_replicates = 0;  // per draw
  std::vector<PredictiveInterval> bills;
  std::vector<PredictiveInterval> legislators;
  double bill_coverage = 0.0;
  double legislator_coverage = 0.0;
  // replicate x bill / replicate x legislator yea proportions (observed cells only)
  std::vector<std::vector<double>> bill_replicates;
  std::vector<std::vector<double>> legislator_replicates;
};

/// Replicated roll-call matrices from the Bernoulli likelihood at evenly
/// spaced draws; coverage of observed bill and legislator yea proportions by
/// the 95% predictive intervals.
inline LsirmPpc ppc_lsirm(const ChainOutput& chain, const VoteMatrix& votes, std::size_t n_rep, std::size_t n_draws,
                          std::uint64_t seed, double level = 0.95) {
  if (n_rep == 0) throw ConfigError("no replicates");
  if (chain.empty()) throw ConfigError("no draws");
  const std::size_t N = votes.n_legislators(), P = votes.n_bills();
  std::vector<double> obs_bill(P, 0.0), obs_leg(N, 0.0), seen_bill(P, 0.0), seen_leg(N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < P; ++j) {
      if (votes.missing(i, j)) continue;
      const double y = votes(i, j) == Vote::Yea;
      obs_bill[j] += y;
      obs_leg[i] += y;
      seen_bill[j] += 1.0;
      seen_leg[i] += 1.0;
    }
  for (std::size_t j = 0; j < P; ++j) obs_bill[j] /= seen_bill[j];
  for (std::size_t i = 0; i < N; ++i) obs_leg[i] /= seen_leg[i];

  LsirmPpc out;
  const auto draws = evenly_spaced(chain.size(), n_draws);
  out.n_draws = draws.size();
  out.n_replicates = n_rep;
  Eigen::MatrixXd prob(N, P);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const LsirmState& s = chain.lsirm[draws[k]];
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < P; ++j) prob(i, j) = vote_prob(s, i, j);
    Rng rng(seed, "ppc", draws[k]);
    for (std::size_t r = 0; r < n_rep; ++r) {
      std::vector<double> bill(P, 0.0), leg(N, 0.0);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < P; ++j) {
          if (votes.missing(i, j)) continue;
          const double y = rng.uniform() < prob(i, j) ? 1.0 : 0.0;
          bill[j] += y;
          leg[i] += y;
        }
      for (std::size_t j = 0; j < P; ++j) bill[j] /= seen_bill[j];
      for (std::size_t i = 0; i < N; ++i) leg[i] /= seen_leg[i];
      out.bill_replicates.push_back(std::move(bill));
      out.legislator_replicates.push_back(std::move(leg));
    }
  }
  const std::size_t R = out.bill_replicates.size();
  std::vector<double> col(R);
  for (std::size_t j = 0; j < P; ++j) {
    for (std::size_t r = 0; r < R; ++r) col[r] = out.bill_replicates[r][j];
    out.bills.push_back(predictive_interval(obs_bill[j], col, level));
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t r = 0; r < R; ++r) col[r] = out.legislator_replicates[r][i];
    out.legislators.push_back(predictive_interval(obs_leg[i], col, level));
  }
  out.bill_coverage = coverage_fraction(out.bills);
  out.legislator_coverage = coverage_fraction(out.legislators);
  return out;
}

struct BetaPpc {
  std::size_t n_draws = 0;
  std::size_t n_replicates = 0;
  // Per legislator: observed mean affinity t_i. averaged over the selected
  // draws, with the predictive interval shifted onto it.
  std::vector<PredictiveInterval> legislators;
  std::vector<double> ppp;
  double coverage = 0.0;
  double ppp_median = 0.0;
  double ppp_mean = 0.0;
  double ppp_below_005 = 0.0;
  PredictiveInterval global;
  double global_ppp = 0.0;
  std::vector<double> global_replicates;          // t.. per replicate
  std::vector<double> global_observed;            // t.. per selected draw
  std::vector<std::vector<double>> legislator_replicates;  // replicate x legislator t_i.
};

/// Internal check of the beta layer: conditional on each selected draw's
/// positions, its affinities are the reference and replicates come from
/// Beta(mu phi, (1 - mu) phi) at that draw's coefficients and precision.
/// Observed and replicate statistics are paired within a draw.
inline BetaPpc ppc_beta(const ChainOutput& chain, const CovariateMatrix& X, const ModelConfig& cfg, std::size_t n_rep,
                        std::size_t n_draws, std::uint64_t seed, double level = 0.95) {
  if (n_rep == 0) throw ConfigError("no replicates");
  if (chain.empty()) throw ConfigError("no draws");
  const auto N = static_cast<Eigen::Index>(chain.lsirm.front().n_legislators());
  const auto P = static_cast<Eigen::Index>(chain.lsirm.front().n_bills());
  const auto draws = evenly_spaced(chain.size(), n_draws);
  BetaPpc out;
  out.n_draws = draws.size();
  out.n_replicates = n_rep;

  const double eps = cfg.affinity_epsilon;
  std::vector<std::vector<double>> diffs(static_cast<std::size_t>(N));
  std::vector<double> global_diffs;
  std::vector<std::size_t> ge(static_cast<std::size_t>(N), 0), le(static_cast<std::size_t>(N), 0);
  std::size_t gge = 0, gle = 0;
  std::vector<double> obs_mean(static_cast<std::size_t>(N), 0.0);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const LsirmState& s = chain.lsirm[draws[k]];
    const RegressionState& reg = chain.regression[draws[k]];
    const Eigen::MatrixXd T = affinity_matrix(s, chain.transform);
    const Eigen::MatrixXd eta = reg.B * X.values().transpose();
    std::vector<double> t_obs(static_cast<std::size_t>(N));
    double g_obs = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      double m = 0.0;
      for (Eigen::Index j = 0; j < P; ++j) m += clamp_unit(T(i, j), eps);
      t_obs[i] = m / static_cast<double>(P);
      obs_mean[i] += t_obs[i] / static_cast<double>(draws.size());
      g_obs += m;
    }
    g_obs /= static_cast<double>(N * P);
    out.global_observed.push_back(g_obs);
    Rng rng(seed, "ppc_beta", draws[k]);
    for (std::size_t r = 0; r < n_rep; ++r) {
      std::vector<double> t_rep(static_cast<std::size_t>(N));
      double g_rep = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        double m = 0.0;
        for (Eigen::Index j = 0; j < P; ++j) {
          const double mu = clamp_unit(logistic(eta(i, j)), eps);
          m += rng.beta(mu * reg.phi, (1.0 - mu) * reg.phi);
        }
        t_rep[i] = m / static_cast<double>(P);
        g_rep += m;
        diffs[i].push_back(t_rep[i] - t_obs[i]);
        ge[i] += t_rep[i] >= t_obs[i];
        le[i] += t_rep[i] <= t_obs[i];
      }
      g_rep /= static_cast<double>(N * P);
      out.global_replicates.push_back(g_rep);
      global_diffs.push_back(g_rep - g_obs);
      gge += g_rep >= g_obs;
      gle += g_rep <= g_obs;
      out.legislator_replicates.push_back(std::move(t_rep));
    }
  }
  const std::size_t R = draws.size() * n_rep;
  for (Eigen::Index i = 0; i < N; ++i) {
    PredictiveInterval d = predictive_interval(0.0, diffs[i], level);
    PredictiveInterval pi{obs_mean[i], obs_mean[i] + d.lower, obs_mean[i] + d.median, obs_mean[i] + d.upper, d.covered};
    out.legislators.push_back(pi);
    out.ppp.push_back(two_sided_ppp(ge[i], le[i], R));
  }
  out.coverage = coverage_fraction(out.legislators);
  std::vector<double> sorted = out.ppp;
  std::sort(sorted.begin(), sorted.end());
  out.ppp_median = quantile_sorted(sorted, 0.5);
  out.ppp_mean = mean(sorted);
  std::size_t low = 0;
  for (double p : sorted) low += p < 0.05;
  out.ppp_below_005 = static_cast<double>(low) / static_cast<double>(sorted.size());
  const double g_mean = mean(out.global_observed);
  const PredictiveInterval gd = predictive_interval(0.0, global_diffs, level);
  out.global = {g_mean, g_mean + gd.lower, g_mean + gd.median, g_mean + gd.upper, gd.covered};
  out.global_ppp = two_sided_ppp(gge, gle, R);
  return out;
}

// ---------------------------------------------------------------------------
// Affinity robustness
// ---------------------------------------------------------------------------

struct RegressionRefit {
  Eigen::MatrixXd post_mean;  // N x K
  double phi_mean = 0.0;
  BlockCounts counts;
};

/// Re-runs only the beta-regression layer with the stored (Z, W) draws as
/// moving data: sweep m uses the affinities of draw m mod L under
/// `transform`. Tuning sweeps come first and are discarded; the remaining
/// sweeps visit every stored draw `cfg.robustness_passes` times.
inline RegressionRefit refit_regression_layer(const ChainOutput& chain, const CovariateMatrix& X,
                                              const ModelConfig& cfg, AffinityTransform transform) {
  if (chain.empty()) throw ConfigError("no draws");
  const auto N = static_cast<Eigen::Index>(chain.lsirm.front().n_legislators());
  const auto K = static_cast<Eigen::Index>(X.n_covariates());
  BetaLayerKernel kernel(X, cfg, static_cast<std::size_t>(N));
  RegressionState reg;
  reg.B = Eigen::MatrixXd::Zero(N, K);
  reg.phi = 10.0;
  kernel.set_state(reg);
  Rng rng(cfg.seed, "robustness", static_cast<std::uint64_t>(transform));
  double beta_scale = cfg.scales.beta > 0.0 ? cfg.scales.beta : 0.5;
  double phi_scale = cfg.scales.log_phi > 0.0 ? cfg.scales.log_phi : 0.05;

  const std::size_t L = chain.size();
  const long burn = std::max(0L, cfg.robustness_burn_in);
  const long keep = static_cast<long>(L) * std::max(1L, cfg.robustness_passes);
  RegressionRefit out;
  out.post_mean = Eigen::MatrixXd::Zero(N, K);
  for (long m = 0; m < burn + keep; ++m) {
    kernel.set_affinities(affinity_matrix(chain.lsirm[static_cast<std::size_t>(m) % L], transform));
    BlockCounts c;
    for (Eigen::Index i = 0; i < N; ++i) {
      const MoveOutcome o = kernel.update_row(i, beta_scale, rng, true);
      c.add(Block::Beta, o.accepted, o.nonfinite);
    }
    const MoveOutcome o = kernel.update_phi(phi_scale, rng, true);
    c.add(Block::LogPhi, o.accepted, o.nonfinite);
    if (m < burn) {
      const double gain = 1.0 / std::pow(static_cast<double>(m) + 1.0, 0.6);
      beta_scale *= std::exp(gain * (c.rate(Block::Beta) - cfg.target_accept_block));
      phi_scale *= std::exp(gain * (c.rate(Block::LogPhi) - cfg.target_accept_scalar));
      continue;
    }
    out.counts.merge(c);
    out.post_mean += kernel.state().B;
    out.phi_mean += kernel.state().phi;
  }
  out.post_mean /= static_cast<double>(keep);
  out.phi_mean /= static_cast<double>(keep);
  return out;
}

struct RobustnessReport {
  std::vector<AffinityTransform> transforms;
  std::vector<std::string> covariate_names;
  std::vector<Eigen::MatrixXd> post_means;  // per transform, N x K
  struct PairCorrelation {
    std::size_t first = 0, second = 0;
    Eigen::VectorXd correlation;  // per covariate, NaN when undefined
  };
  std::vector<PairCorrelation> pairs;
  std::string party_a, party_b;
  Eigen::MatrixXd contrasts;  // transforms x K party-mean differences (empty without a roster)
};

/// Coefficient concordance across affinity transforms. By default only the
/// regression layer is re-run on the stored positions; with
/// `cfg.robustness_full_refit` the whole model is refitted per transform.
inline RobustnessReport affinity_robustness(const ChainOutput& chain, const CovariateMatrix& X, const ModelConfig& cfg,
                                            const std::vector<AffinityTransform>& transforms,
                                            const PartyRoster* roster = nullptr, const VoteMatrix* votes = nullptr) {
  if (transforms.size() < 2) throw ConfigError("need >= 2 transforms");
  if (chain.empty()) throw ConfigError("no draws");
  RobustnessReport rep;
  rep.transforms = transforms;
  rep.covariate_names = X.column_names();
  for (AffinityTransform t : transforms) {
    if (cfg.robustness_full_refit) {
      if (!votes) throw ConfigError("full refit requires the vote matrix");
      ModelConfig c = cfg;
      c.transform = t;
      const ChainOutput refit = run(*votes, X, c);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(refit.regression.front().B.rows(), refit.regression.front().B.cols());
      for (const auto& r : refit.regression) m += r.B;
      rep.post_means.push_back(m / static_cast<double>(refit.size()));
    } else {
      rep.post_means.push_back(refit_regression_layer(chain, X, cfg, t).post_mean);
    }
  }
  const Eigen::Index K = static_cast<Eigen::Index>(X.n_covariates());
  const Eigen::Index N = rep.post_means.front().rows();
  for (std::size_t a = 0; a < transforms.size(); ++a) {
    for (std::size_t b = a + 1; b < transforms.size(); ++b) {
      RobustnessReport::PairCorrelation pc{a, b, Eigen::VectorXd(K)};
      for (Eigen::Index k = 0; k < K; ++k) {
        std::vector<double> x(static_cast<std::size_t>(N)), y(static_cast<std::size_t>(N));
        for (Eigen::Index i = 0; i < N; ++i) {
          x[i] = rep.post_means[a](i, k);
          y[i] = rep.post_means[b](i, k);
        }
        pc.correlation(k) = correlation(x, y);
      }
      rep.pairs.push_back(std::move(pc));
    }
  }
  if (roster) {
    std::tie(rep.party_a, rep.party_b) = polarization_pair(*roster, chain.legislator_ids, cfg);
    rep.contrasts.resize(static_cast<Eigen::Index>(transforms.size()), K);
    for (std::size_t t = 0; t < transforms.size(); ++t) {
      for (Eigen::Index k = 0; k < K; ++k) {
        std::vector<double> ma, mb;
        for (Eigen::Index i = 0; i < N; ++i) {
          const auto& p = roster->party_of(chain.legislator_ids[i]);
          if (p == rep.party_a) ma.push_back(rep.post_means[t](i, k));
          if (p == rep.party_b) mb.push_back(rep.post_means[t](i, k));
        }
        rep.contrasts(static_cast<Eigen::Index>(t), k) = mean(ma) - mean(mb);
      }
    }
  }
  return rep;
}

}  // namespace lsbeta
