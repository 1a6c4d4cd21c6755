#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "lsbeta/covariates.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/numerics.hpp"
#include "lsbeta/sampler.hpp"

namespace lsbeta {

struct ProcrustesFit {
  Eigen::MatrixXd rotation;  // S x S orthogonal, reflections allowed
  Eigen::RowVectorXd center;
  double objective = 0.0;  // || (X - center) R - reference ||_F^2
  bool degenerate = false;
};

inline Eigen::MatrixXd centered(const Eigen::MatrixXd& X) { return X.rowwise() - X.colwise().mean(); }

/// Orthogonal Procrustes match of a configuration to an already-centred
/// reference: R = U V' from the SVD of Xc' Ref.
inline ProcrustesFit procrustes_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& reference) {
  ProcrustesFit fit;
  fit.center = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - fit.center;
  const Eigen::Index S = X.cols();
  if (Xc.norm() <= 1e-12 || reference.norm() <= 1e-12) {
    fit.rotation = Eigen::MatrixXd::Identity(S, S);
    fit.degenerate = true;
  } else {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xc.transpose() * reference, Eigen::ComputeFullU | Eigen::ComputeFullV);
    fit.rotation = svd.matrixU() * svd.matrixV().transpose();
  }
  fit.objective = (Xc * fit.rotation - reference).squaredNorm();
  return fit;
}

inline Eigen::MatrixXd stacked_positions(const LsirmState& s) {
  Eigen::MatrixXd X(s.Z.rows() + s.W.rows(), s.Z.cols());
  X << s.Z, s.W;
  return X;
}

/// Chain whose (Z, W) draws are centred and rotated onto a common reference.
struct AlignedChain {
  ChainOutput chain;
  std::size_t reference_index = 0;
  Eigen::MatrixXd reference;  // centred stacked (Z; W) of the reference draw
  std::size_t degenerate_draws = 0;
};

inline std::size_t map_draw_index(const ChainOutput& chain) {
  if (chain.empty()) throw ConfigError("no draws");
  std::size_t best = 0;
  for (std::size_t l = 1; l < chain.log_posterior.size(); ++l)
    if (chain.log_posterior[l] > chain.log_posterior[best]) best = l;
  return best;
}

/// Aligns every draw to the maximum-log-posterior draw. One transform per
/// draw, fitted on the stacked legislator and bill positions and applied to
/// both, so all legislator-bill distances are preserved.
inline AlignedChain procrustes_align(const ChainOutput& chain) {
  AlignedChain out;
  out.chain = chain;
  out.reference_index = map_draw_index(chain);
  out.reference = centered(stacked_positions(chain.lsirm[out.reference_index]));
  for (auto& s : out.chain.lsirm) {
    const ProcrustesFit fit = procrustes_fit(stacked_positions(s), out.reference);
    out.degenerate_draws += fit.degenerate;
    s.Z = (s.Z.rowwise() - fit.center) * fit.rotation;
    s.W = (s.W.rowwise() - fit.center) * fit.rotation;
  }
  return out;
}

/// Issue-coefficient summaries across legislators and parties.
struct IssueSummary {
  std::vector<std::string> legislator_ids;
  std::vector<std::string> party_of;
  std::vector<std::string> covariate_names;
  std::vector<std::string> parties;
  std::vector<std::size_t> party_size;
  Eigen::MatrixXd post_mean, lower, upper;  // N x K
  Eigen::MatrixXd party_mean, party_sd;     // parties x K, NaN where undefined
  std::string party_a, party_b;
  Eigen::VectorXd mean_difference;  // party_a mean minus party_b mean
  Eigen::VectorXd between_sd;       // sd of all legislators' posterior means
  double cred_level = 0.95;
};

// Two largest parties (ties broken by label) when none are designated.
inline std::pair<std::string, std::string> polarization_pair(const PartyRoster& roster,
                                                             const std::vector<std::string>& legislators,
                                                             const ModelConfig& cfg) {
  if (!cfg.party_a.empty() && !cfg.party_b.empty()) return {cfg.party_a, cfg.party_b};
  std::vector<std::pair<std::size_t, std::string>> sizes;
  for (const auto& p : roster.parties()) {
    std::size_t n = 0;
    for (const auto& id : legislators) n += roster.party_of(id) == p;
    sizes.emplace_back(n, p);
  }
  std::sort(sizes.begin(), sizes.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  if (sizes.size() < 2) throw ConfigError("need at least two parties for a polarization contrast");
  return {sizes[0].second, sizes[1].second};
}

inline IssueSummary coefficient_summaries(const AlignedChain& aligned, const PartyRoster& roster,
                                          const ModelConfig& cfg) {
  const ChainOutput& chain = aligned.chain;
  if (chain.empty()) throw ConfigError("no draws");
  const auto L = chain.size();
  const Eigen::Index N = chain.regression.front().B.rows(), K = chain.regression.front().B.cols();
  IssueSummary s;
  s.legislator_ids = chain.legislator_ids;
  s.covariate_names = chain.covariate_names;
  s.cred_level = cfg.cred_level;
  roster.require_covers(s.legislator_ids);
  for (const auto& id : s.legislator_ids) s.party_of.push_back(roster.party_of(id));
  s.parties = roster.parties();
  std::tie(s.party_a, s.party_b) = polarization_pair(roster, s.legislator_ids, cfg);

  const double tail = 0.5 * (1.0 - cfg.cred_level);
  s.post_mean.resize(N, K);
  s.lower.resize(N, K);
  s.upper.resize(N, K);
  std::vector<double> draws(L);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index k = 0; k < K; ++k) {
      double sum = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        draws[l] = chain.regression[l].B(i, k);
        sum += draws[l];
      }
      s.post_mean(i, k) = sum / static_cast<double>(L);
      std::sort(draws.begin(), draws.end());
      s.lower(i, k) = std::min(quantile_sorted(draws, tail), s.post_mean(i, k));
      s.upper(i, k) = std::max(quantile_sorted(draws, 1.0 - tail), s.post_mean(i, k));
    }
  }

  const auto G = static_cast<Eigen::Index>(s.parties.size());
  s.party_mean.resize(G, K);
  s.party_sd.resize(G, K);
  s.party_size.assign(s.parties.size(), 0);
  for (Eigen::Index g = 0; g < G; ++g) {
    for (Eigen::Index k = 0; k < K; ++k) {
      std::vector<double> members;
      for (Eigen::Index i = 0; i < N; ++i)
        if (s.party_of[i] == s.parties[g]) members.push_back(s.post_mean(i, k));
      s.party_size[g] = members.size();
      s.party_mean(g, k) = mean(members);
      s.party_sd(g, k) = sample_sd(members);
    }
  }
  auto party_index = [&](const std::string& p) -> Eigen::Index {
    const auto it = std::find(s.parties.begin(), s.parties.end(), p);
    return it == s.parties.end() ? -1 : static_cast<Eigen::Index>(it - s.parties.begin());
  };
  const Eigen::Index ga = party_index(s.party_a), gb = party_index(s.party_b);
  s.mean_difference.resize(K);
  s.between_sd.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    s.mean_difference(k) = (ga < 0 || gb < 0) ? kUndefined : s.party_mean(ga, k) - s.party_mean(gb, k);
    std::vector<double> all(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) all[i] = s.post_mean(i, k);
    s.between_sd(k) = sample_sd(all);
  }
  return s;
}

struct SpectrumRow {
  std::string legislator_id;
  std::string party;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Legislators' coefficients for one covariate, ascending by posterior mean,
/// ties broken by legislator id.
inline std::vector<SpectrumRow> ordered_coefficient_export(const IssueSummary& s, const std::string& covariate) {
  const auto it = std::find(s.covariate_names.begin(), s.covariate_names.end(), covariate);
  if (it == s.covariate_names.end()) throw ConfigError("unknown covariate '" + covariate + "'");
  const auto k = static_cast<Eigen::Index>(it - s.covariate_names.begin());
  std::vector<SpectrumRow> rows;
  for (std::size_t i = 0; i < s.legislator_ids.size(); ++i)
    rows.push_back({s.legislator_ids[i], s.party_of[i], s.post_mean(i, k), s.lower(i, k), s.upper(i, k)});
  std::sort(rows.begin(), rows.end(), [](const SpectrumRow& x, const SpectrumRow& y) {
    return x.mean != y.mean ? x.mean < y.mean : x.legislator_id < y.legislator_id;
  });
  return rows;
}

}  // namespace lsbeta
