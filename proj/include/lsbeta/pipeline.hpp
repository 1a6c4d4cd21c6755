#pragma once

#include <string>
#include <vector>

#include "lsbeta/config.hpp"
#include "lsbeta/covariates.hpp"
#include "lsbeta/votes.hpp"

namespace lsbeta {

// Vote and covariate inputs after screening, ready for the sampler.
struct PreparedData {
  VoteMatrix raw;
  VoteMatrix votes;  // lopsided bills removed
  CovariateMatrix covariates;
  std::vector<std::string> removed_bills;
};

inline PreparedData prepare_data(VoteMatrix raw, const CovariateMatrix& covariates, const ModelConfig& cfg) {
  PreparedData d;
  raw.require_coverage();
  auto filtered = filter_lopsided(raw, cfg.lopsided_lo, cfg.lopsided_hi,
                                  cfg.rate_counts_missing ? RateDenominator::AllCells : RateDenominator::NonMissing);
  d.raw = std::move(raw);
  d.votes = std::move(filtered.votes);
  d.removed_bills = std::move(filtered.removed_bill_ids);
  d.covariates = validate_covariates(covariates, d.votes);
  return d;
}

inline PreparedData prepare_data(const std::string& votes_path, const std::string& covariates_path,
                                 const ModelConfig& cfg) {
  return prepare_data(load_votes(votes_path), load_covariates(covariates_path), cfg);
}

}  // namespace lsbeta
