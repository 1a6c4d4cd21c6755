#pragma once

#include <cctype>
#include <filesystem>
#include <type_traits>
#include <sstream>
#include <string>
#include <vector>

#include "lsbeta/delimited.hpp"
#include "lsbeta/model_eval.hpp"
#include "lsbeta/postprocess.hpp"
#include "lsbeta/synthetic.hpp"

namespace lsbeta {

// Each writer returns {relative path, content} pairs; the caller decides when
// and where they hit the disk.
using ReportFiles = std::vector<std::pair<std::string, std::string>>;

namespace detail {

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header) { w_.row(header); }
  template <typename... T>
  void add(const T&... cells) {
    std::vector<std::string> row{cell(cells)...};
    w_.row(row);
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  std::ostringstream out_;
  DelimitedWriter w_{out_};
};

// Covariate names can be arbitrary text; keep spectra file names tame.
inline std::string file_stem(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  return out.empty() ? "covariate" : out;
}

}  // namespace detail

inline ReportFiles criteria_files(const CriteriaReport& report) {
  detail::CsvBuilder csv({"latent_dim", "n_draws", "n_obs", "n_params", "max_loglik", "mean_loglik", "loglik_at_mean",
                          "bic", "p_dic", "dic", "lppd", "p_waic", "waic"});
  for (const auto& r : report)
    csv.add(r.latent_dim, r.n_draws, r.n_obs, r.n_params, r.max_loglik, r.mean_loglik, r.loglik_at_mean, r.bic,
            r.p_dic, r.dic, r.lppd, r.p_waic, r.waic);
  return {{"criteria.csv", csv.str()}};
}

inline ReportFiles summary_files(const IssueSummary& s) {
  ReportFiles files;
  const auto N = s.legislator_ids.size(), K = s.covariate_names.size();
  detail::CsvBuilder coef({"legislator", "party", "covariate", "mean", "lower", "upper"});
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < K; ++k)
      coef.add(s.legislator_ids[i], s.party_of[i], s.covariate_names[k], s.post_mean(i, k), s.lower(i, k), s.upper(i, k));
  files.emplace_back("coefficients.csv", coef.str());

  detail::CsvBuilder party({"party", "size", "covariate", "mean", "sd", "cohesion"});
  for (std::size_t g = 0; g < s.parties.size(); ++g)
    for (std::size_t k = 0; k < K; ++k) {
      const double sd = s.party_sd(g, k);
      party.add(s.parties[g], s.party_size[g], s.covariate_names[k], s.party_mean(g, k), sd,
                std::isfinite(sd) && sd > 0.0 ? 1.0 / sd : kUndefined);
    }
  files.emplace_back("party_summary.csv", party.str());

  detail::CsvBuilder pol({"covariate", "party_a", "party_b", "mean_difference", "between_sd"});
  for (std::size_t k = 0; k < K; ++k)
    pol.add(s.covariate_names[k], s.party_a, s.party_b, s.mean_difference(k), s.between_sd(k));
  files.emplace_back("polarization.csv", pol.str());

  for (const auto& name : s.covariate_names) {
    detail::CsvBuilder sp({"rank", "legislator", "party", "mean", "lower", "upper"});
    std::size_t rank = 1;
    for (const auto& r : ordered_coefficient_export(s, name)) sp.add(rank++, r.legislator_id, r.party, r.mean, r.lower, r.upper);
    files.emplace_back("spectra/" + detail::file_stem(name) + ".csv", sp.str());
  }
  return files;
}

inline ReportFiles lsirm_ppc_files(const LsirmPpc& ppc, const VoteMatrix& votes) {
  ReportFiles files;
  auto intervals = [](const char* key, const std::vector<std::string>& ids, const std::vector<PredictiveInterval>& v) {
    detail::CsvBuilder csv({key, "observed", "lower", "median", "upper", "covered"});
    for (std::size_t k = 0; k < v.size(); ++k)
      csv.add(ids[k], v[k].observed, v[k].lower, v[k].median, v[k].upper, v[k].covered);
    return csv.str();
  };
  files.emplace_back("ppc_bills.csv", intervals("bill", votes.bill_ids(), ppc.bills));
  files.emplace_back("ppc_legislators.csv", intervals("legislator", votes.legislator_ids(), ppc.legislators));

  // long-format replicate export for density plots
  detail::CsvBuilder rep({"replicate", "level", "id", "yea_rate"});
  for (std::size_t r = 0; r < ppc.bill_replicates.size(); ++r)
    for (std::size_t j = 0; j < ppc.bill_replicates[r].size(); ++j)
      rep.add(r, "bill", votes.bill_ids()[j], ppc.bill_replicates[r][j]);
  for (std::size_t r = 0; r < ppc.legislator_replicates.size(); ++r)
    for (std::size_t i = 0; i < ppc.legislator_replicates[r].size(); ++i)
      rep.add(r, "legislator", votes.legislator_ids()[i], ppc.legislator_replicates[r][i]);
  files.emplace_back("ppc_replicates.csv", rep.str());

  detail::CsvBuilder sum({"statistic", "value"});
  sum.add("n_draws", ppc.n_draws);
  sum.add("replicates_per_draw", ppc.n_replicates);
  sum.add("bill_coverage", ppc.bill_coverage);
  sum.add("legislator_coverage", ppc.legislator_coverage);
  files.emplace_back("ppc_summary.csv", sum.str());
  return files;
}

inline ReportFiles beta_ppc_files(const BetaPpc& ppc, const std::vector<std::string>& legislator_ids) {
  ReportFiles files;
  detail::CsvBuilder leg({"legislator", "observed", "lower", "median", "upper", "covered", "ppp"});
  for (std::size_t i = 0; i < ppc.legislators.size(); ++i) {
    const auto& v = ppc.legislators[i];
    leg.add(legislator_ids[i], v.observed, v.lower, v.median, v.upper, v.covered, ppc.ppp[i]);
  }
  files.emplace_back("beta_ppc_legislators.csv", leg.str());

  detail::CsvBuilder rep({"replicate", "level", "id", "mean_affinity"});
  for (std::size_t r = 0; r < ppc.global_replicates.size(); ++r) rep.add(r, "global", "all", ppc.global_replicates[r]);
  for (std::size_t r = 0; r < ppc.legislator_replicates.size(); ++r)
    for (std::size_t i = 0; i < ppc.legislator_replicates[r].size(); ++i)
      rep.add(r, "legislator", legislator_ids[i], ppc.legislator_replicates[r][i]);
  files.emplace_back("beta_ppc_replicates.csv", rep.str());

  detail::CsvBuilder obs({"draw", "observed_mean_affinity"});
  for (std::size_t k = 0; k < ppc.global_observed.size(); ++k) obs.add(k, ppc.global_observed[k]);
  files.emplace_back("beta_ppc_observed.csv", obs.str());

  detail::CsvBuilder sum({"statistic", "value"});
  sum.add("n_draws", ppc.n_draws);
  sum.add("replicates_per_draw", ppc.n_replicates);
  sum.add("legislator_coverage", ppc.coverage);
  sum.add("ppp_median", ppc.ppp_median);
  sum.add("ppp_mean", ppc.ppp_mean);
  sum.add("ppp_fraction_below_0.05", ppc.ppp_below_005);
  sum.add("global_observed", ppc.global.observed);
  sum.add("global_lower", ppc.global.lower);
  sum.add("global_upper", ppc.global.upper);
  sum.add("global_ppp", ppc.global_ppp);
  files.emplace_back("beta_ppc_summary.csv", sum.str());
  return files;
}

inline ReportFiles robustness_files(const RobustnessReport& r, const std::vector<std::string>& legislator_ids) {
  ReportFiles files;
  detail::CsvBuilder means({"transform", "legislator", "covariate", "mean"});
  for (std::size_t t = 0; t < r.transforms.size(); ++t)
    for (std::size_t i = 0; i < legislator_ids.size(); ++i)
      for (std::size_t k = 0; k < r.covariate_names.size(); ++k)
        means.add(to_string(r.transforms[t]), legislator_ids[i], r.covariate_names[k], r.post_means[t](i, k));
  files.emplace_back("robustness_means.csv", means.str());

  detail::CsvBuilder cor({"first", "second", "covariate", "correlation"});
  for (const auto& p : r.pairs)
    for (std::size_t k = 0; k < r.covariate_names.size(); ++k)
      cor.add(to_string(r.transforms[p.first]), to_string(r.transforms[p.second]), r.covariate_names[k], p.correlation(k));
  files.emplace_back("robustness_correlations.csv", cor.str());

  if (r.contrasts.size() > 0) {
    detail::CsvBuilder con({"transform", "party_a", "party_b", "covariate", "mean_difference"});
    for (std::size_t t = 0; t < r.transforms.size(); ++t)
      for (std::size_t k = 0; k < r.covariate_names.size(); ++k)
        con.add(to_string(r.transforms[t]), r.party_a, r.party_b, r.covariate_names[k], r.contrasts(t, k));
    files.emplace_back("robustness_contrasts.csv", con.str());
  }
  return files;
}

// Simulated bundle: inputs in the loader formats plus the truth record.
inline ReportFiles synthetic_files(const SyntheticData& d) {
  ReportFiles files;
  files.emplace_back("votes.csv", serialize_votes(d.votes));
  files.emplace_back("covariates.csv", serialize_covariates(d.covariates));
  {
    detail::CsvBuilder p({"legislator", "party"});
    for (const auto& id : d.votes.legislator_ids()) p.add(id, d.roster.party_of(id));
    files.emplace_back("parties.csv", p.str());
  }
  const auto& t = d.truth;
  const auto S = t.lsirm.Z.cols();
  const auto& cov = d.covariates.column_names();
  {
    std::vector<std::string> h{"legislator", "party", "a"};
    for (Eigen::Index s = 0; s < S; ++s) h.push_back("z" + std::to_string(s + 1));
    for (const auto& c : cov) h.push_back("beta_" + c);
    std::ostringstream out;
    DelimitedWriter w(out);
    w.row(h);
    for (std::size_t i = 0; i < d.votes.n_legislators(); ++i) {
      const auto id = d.votes.legislator_ids()[i];
      std::vector<std::string> row{id, d.roster.party_of(id), format_double(t.lsirm.a(i))};
      for (Eigen::Index s = 0; s < S; ++s) row.push_back(format_double(t.lsirm.Z(i, s)));
      for (std::size_t k = 0; k < cov.size(); ++k) row.push_back(format_double(t.regression.B(i, k)));
      w.row(row);
    }
    files.emplace_back("truth_legislators.csv", out.str());
  }
  {
    std::vector<std::string> h{"bill", "b"};
    for (Eigen::Index s = 0; s < S; ++s) h.push_back("w" + std::to_string(s + 1));
    std::ostringstream out;
    DelimitedWriter w(out);
    w.row(h);
    for (std::size_t j = 0; j < d.votes.n_bills(); ++j) {
      std::vector<std::string> row{d.votes.bill_ids()[j], format_double(t.lsirm.b(j))};
      for (Eigen::Index s = 0; s < S; ++s) row.push_back(format_double(t.lsirm.W(j, s)));
      w.row(row);
    }
    files.emplace_back("truth_bills.csv", out.str());
  }
  {
    detail::CsvBuilder csv({"parameter", "value"});
    csv.add("gamma", t.gamma);
    csv.add("phi", t.regression.phi);
    csv.add("sigma2_a", t.lsirm.sigma2_a);
    csv.add("sigma2_b", t.lsirm.sigma2_b);
    csv.add("latent_dim", static_cast<long>(S));
    files.emplace_back("truth_scalars.csv", csv.str());
  }
  files.emplace_back("complete_votes.csv", serialize_votes(t.complete_votes));
  return files;
}

}  // namespace lsbeta
