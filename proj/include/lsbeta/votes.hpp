#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lsbeta/delimited.hpp"
#include "lsbeta/error.hpp"

namespace lsbeta {

enum class Vote : std::uint8_t { NotYea = 0, Yea = 1, Missing = 2 };

/// Legislator-by-bill roll-call matrix with three cell states.
///
/// Dimensions, id uniqueness and cell states are enforced at construction.
/// Row/column coverage (no all-missing legislator or bill) is a property of
/// analysable data and is checked by `require_coverage()`, which every loader
/// and filter calls; programmatic construction may skip it so that degenerate
/// matrices can be used in tests and prior-only runs.
class VoteMatrix {
 public:
  VoteMatrix() = default;

  VoteMatrix(std::vector<std::string> legislator_ids, std::vector<std::string> bill_ids,
             std::vector<Vote> cells)
      : legislators_(std::move(legislator_ids)), bills_(std::move(bill_ids)), cells_(std::move(cells)) {
    if (cells_.size() != legislators_.size() * bills_.size()) {
      throw DataError("vote matrix has " + std::to_string(cells_.size()) + " cells, expected " +
                      std::to_string(legislators_.size()) + " x " + std::to_string(bills_.size()));
    }
    require_unique(legislators_, "legislator");
    require_unique(bills_, "bill");
    for (Vote v : cells_) {
      if (v != Vote::NotYea && v != Vote::Yea && v != Vote::Missing) throw DataError("invalid vote cell state");
    }
  }

  std::size_t n_legislators() const { return legislators_.size(); }
  std::size_t n_bills() const { return bills_.size(); }
  const std::vector<std::string>& legislator_ids() const { return legislators_; }
  const std::vector<std::string>& bill_ids() const { return bills_; }
  const std::vector<Vote>& cells() const { return cells_; }

  Vote operator()(std::size_t i, std::size_t j) const { return cells_[i * bills_.size() + j]; }
  bool missing(std::size_t i, std::size_t j) const { return (*this)(i, j) == Vote::Missing; }

  std::size_t n_observed() const {
    std::size_t n = 0;
    for (Vote v : cells_) n += (v != Vote::Missing);
    return n;
  }
  std::size_t n_missing() const { return cells_.size() - n_observed(); }

  void require_coverage() const {
    if (legislators_.empty() || bills_.empty()) throw DataError("no rows");
    for (std::size_t i = 0; i < n_legislators(); ++i) {
      bool any = false;
      for (std::size_t j = 0; j < n_bills() && !any; ++j) any = !missing(i, j);
      if (!any) throw DataError("legislator '" + legislators_[i] + "' has no observed votes");
    }
    for (std::size_t j = 0; j < n_bills(); ++j) {
      bool any = false;
      for (std::size_t i = 0; i < n_legislators() && !any; ++i) any = !missing(i, j);
      if (!any) throw DataError("bill '" + bills_[j] + "' has no observed votes");
    }
  }

  VoteMatrix select_bills(const std::vector<std::size_t>& keep) const {
    std::vector<std::string> ids;
    std::vector<Vote> cells;
    cells.reserve(n_legislators() * keep.size());
    for (std::size_t j : keep) ids.push_back(bills_.at(j));
    for (std::size_t i = 0; i < n_legislators(); ++i)
      for (std::size_t j : keep) cells.push_back((*this)(i, j));
    return VoteMatrix(legislators_, std::move(ids), std::move(cells));
  }

  friend bool operator==(const VoteMatrix&, const VoteMatrix&) = default;

 private:
  static void require_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
      if (id.empty()) throw DataError(std::string("empty ") + what + " id");
      if (!seen.insert(id).second) throw DataError(std::string("duplicate ") + what + " id '" + id + "'");
    }
  }

  std::vector<std::string> legislators_;
  std::vector<std::string> bills_;
  std::vector<Vote> cells_;
};

/// Token-to-state mapping applied when reading a vote file.
struct VoteCoding {
  std::map<std::string, Vote> tokens;

  // The on-disk format: 1, 0 and the missing sentinel NA.
  static VoteCoding binary() {
    return {{{"1", Vote::Yea}, {"0", Vote::NotYea}, {"NA", Vote::Missing}}};
  }

  // Raw roll-call categories. Nay and abstention are non-support; an
  // institutionally barred vote is missing. Absence is treated as missing.
  static VoteCoding categorical() {
    return {{{"Yea", Vote::Yea},
             {"Nay", Vote::NotYea},
             {"Abstention", Vote::NotYea},
             {"Absence", Vote::Missing},
             {"Barred", Vote::Missing},
             {"NA", Vote::Missing},
             {"1", Vote::Yea},
             {"0", Vote::NotYea}}};
  }
};

/// First row holds bill ids (its first cell is a free label), first column
/// holds legislator ids.
inline VoteMatrix load_votes(const std::string& path, const VoteCoding& coding = VoteCoding::binary()) {
  const Table table = read_table(path);
  if (table.rows.size() < 2) throw DataError(path + ": no rows");
  const auto& header = table.rows.front();
  if (header.size() < 2) throw DataError(table.where(0) + ": header has no bill ids");
  std::vector<std::string> bills(header.begin() + 1, header.end());
  std::vector<std::string> legislators;
  std::vector<Vote> cells;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != header.size()) {
      throw DataError(table.where(r) + ": dimension mismatch, row has " + std::to_string(row.size() - 1) +
                      " votes but header has " + std::to_string(bills.size()) + " bills");
    }
    legislators.push_back(row.front());
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto it = coding.tokens.find(row[c]);
      if (it == coding.tokens.end()) {
        throw DataError(table.where(r) + ": unknown token '" + row[c] + "' for legislator '" + row.front() +
                        "', bill '" + bills[c - 1] + "'");
      }
      cells.push_back(it->second);
    }
  }
  VoteMatrix votes(std::move(legislators), std::move(bills), std::move(cells));
  votes.require_coverage();
  return votes;
}

inline std::string serialize_votes(const VoteMatrix& votes) {
  std::ostringstream out;
  DelimitedWriter w(out);
  std::vector<std::string> header{"legislator"};
  header.insert(header.end(), votes.bill_ids().begin(), votes.bill_ids().end());
  w.row(header);
  for (std::size_t i = 0; i < votes.n_legislators(); ++i) {
    std::vector<std::string> row{votes.legislator_ids()[i]};
    for (std::size_t j = 0; j < votes.n_bills(); ++j) {
      const Vote v = votes(i, j);
      row.push_back(v == Vote::Missing ? "NA" : (v == Vote::Yea ? "1" : "0"));
    }
    w.row(row);
  }
  return out.str();
}

inline void write_votes(const std::string& path, const VoteMatrix& votes) {
  write_text_file(path, serialize_votes(votes));
}

/// How the per-bill yea rate is normalised when screening lopsided bills.
enum class RateDenominator { NonMissing, AllCells };

struct LopsidedFilterResult {
  VoteMatrix votes;
  std::vector<std::string> removed_bill_ids;
};

inline double yea_rate(const VoteMatrix& votes, std::size_t j, RateDenominator denom = RateDenominator::NonMissing) {
  std::size_t yea = 0, seen = 0;
  for (std::size_t i = 0; i < votes.n_legislators(); ++i) {
    const Vote v = votes(i, j);
    if (v == Vote::Missing) continue;
    ++seen;
    yea += (v == Vote::Yea);
  }
  const std::size_t n = denom == RateDenominator::NonMissing ? seen : votes.n_legislators();
  return n == 0 ? 0.0 : static_cast<double>(yea) / static_cast<double>(n);
}

/// Keeps bills whose yea rate lies in [lo, hi].
inline LopsidedFilterResult filter_lopsided(const VoteMatrix& votes, double lo, double hi,
                                            RateDenominator denom = RateDenominator::NonMissing) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw ConfigError("lopsided filter requires 0 <= lo < hi <= 1");
  }
  std::vector<std::size_t> keep;
  LopsidedFilterResult result;
  for (std::size_t j = 0; j < votes.n_bills(); ++j) {
    const double rate = yea_rate(votes, j, denom);
    if (rate >= lo && rate <= hi) {
      keep.push_back(j);
    } else {
      result.removed_bill_ids.push_back(votes.bill_ids()[j]);
    }
  }
  if (keep.empty()) throw DataError("empty agenda: every bill was removed by the lopsided filter");
  result.votes = votes.select_bills(keep);
  result.votes.require_coverage();
  return result;
}

/// Columns of `votes` matching `bill_ids`, in that order.
inline VoteMatrix select_bills_by_id(const VoteMatrix& votes, const std::vector<std::string>& bill_ids) {
  std::vector<std::size_t> keep;
  for (const auto& id : bill_ids) {
    const auto it = std::find(votes.bill_ids().begin(), votes.bill_ids().end(), id);
    if (it == votes.bill_ids().end()) throw DataError("bill '" + id + "' is not in the vote matrix");
    keep.push_back(static_cast<std::size_t>(it - votes.bill_ids().begin()));
  }
  return votes.select_bills(keep);
}

/// Laakso-Taagepera index 1 / sum(s^2) of seat shares.
inline double effective_parties(const std::vector<double>& shares) {
  if (shares.empty()) throw ConfigError("effective_parties: no shares");
  double sum = 0.0, sq = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw ConfigError("effective_parties: negative or non-finite share");
    sum += s;
    sq += s * s;
  }
  if (sum == 0.0) throw ConfigError("effective_parties: shares sum to zero");
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("effective_parties: shares must sum to 1");
  return 1.0 / sq;
}

inline double effective_parties_from_seats(const std::vector<double>& seats) {
  double total = 0.0;
  for (double s : seats) {
    if (!(s >= 0.0)) throw ConfigError("effective_parties: negative or non-finite seat count");
    total += s;
  }
  if (total == 0.0) throw ConfigError("effective_parties: seat counts sum to zero");
  std::vector<double> shares;
  for (double s : seats) shares.push_back(s / total);
  return effective_parties(shares);
}

}  // namespace lsbeta
