#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsbeta/delimited.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/votes.hpp"

namespace lsbeta {

/// Bill-by-covariate design matrix (one row x_j per bill).
class CovariateMatrix {
 public:
  CovariateMatrix() = default;

  CovariateMatrix(std::vector<std::string> bill_ids, std::vector<std::string> column_names, Eigen::MatrixXd values,
                  std::size_t intercept_column, std::vector<bool> simplex_columns = {})
      : bills_(std::move(bill_ids)),
        names_(std::move(column_names)),
        x_(std::move(values)),
        intercept_(intercept_column),
        simplex_(std::move(simplex_columns)) {
    if (simplex_.empty()) simplex_.assign(names_.size(), false);
    if (static_cast<std::size_t>(x_.rows()) != bills_.size() || static_cast<std::size_t>(x_.cols()) != names_.size() ||
        simplex_.size() != names_.size()) {
      throw DataError("covariate matrix dimensions do not match its id lists");
    }
    if (names_.empty()) throw DataError("covariate matrix has no columns");
    if (intercept_ >= names_.size()) throw DataError("intercept column out of range");
    for (Eigen::Index j = 0; j < x_.rows(); ++j) {
      for (Eigen::Index k = 0; k < x_.cols(); ++k) {
        if (!std::isfinite(x_(j, k)))
          throw DataError("non-finite covariate '" + names_[k] + "' for bill '" + bills_[j] + "'");
      }
      if (x_(j, static_cast<Eigen::Index>(intercept_)) != 1.0)
        throw DataError("intercept column is not 1 for bill '" + bills_[j] + "'");
      double topic_sum = 0.0;
      bool any_topic = false;
      for (std::size_t k = 0; k < names_.size(); ++k) {
        if (!simplex_[k]) continue;
        any_topic = true;
        if (x_(j, k) < 0.0)
          throw DataError("negative topic proportion '" + names_[k] + "' for bill '" + bills_[j] + "'");
        topic_sum += x_(j, k);
      }
      if (any_topic && topic_sum > 1.0 + 1e-9)
        throw DataError("topic proportions of bill '" + bills_[j] + "' sum above 1");
    }
  }

  std::size_t n_bills() const { return bills_.size(); }
  std::size_t n_covariates() const { return names_.size(); }
  const std::vector<std::string>& bill_ids() const { return bills_; }
  const std::vector<std::string>& column_names() const { return names_; }
  const Eigen::MatrixXd& values() const { return x_; }
  std::size_t intercept_column() const { return intercept_; }
  const std::vector<bool>& simplex_columns() const { return simplex_; }

  auto row(std::size_t j) const { return x_.row(static_cast<Eigen::Index>(j)); }

 private:
  std::vector<std::string> bills_;
  std::vector<std::string> names_;
  Eigen::MatrixXd x_;
  std::size_t intercept_ = 0;
  std::vector<bool> simplex_;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace detail

/// First row holds covariate names, first column holds bill ids. A column named
/// `intercept` (any case, optionally parenthesised) is used as the intercept;
/// without one, an intercept column of ones is prepended. Columns whose names
/// start with `simplex_prefix` are flagged as topic proportions.
inline CovariateMatrix load_covariates(const std::string& path, const std::string& simplex_prefix = "topic") {
  const Table table = read_table(path);
  if (table.rows.size() < 2) throw DataError(path + ": no rows");
  const auto& header = table.rows.front();
  if (header.size() < 2) throw DataError(table.where(0) + ": header has no covariate names");
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::size_t intercept = names.size();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto n = detail::lower(names[k]);
    if (n == "intercept" || n == "(intercept)") intercept = k;
  }
  const bool prepend = intercept == names.size();
  const std::size_t offset = prepend ? 1 : 0;
  const std::size_t K = names.size() + offset;
  const std::size_t P = table.rows.size() - 1;
  Eigen::MatrixXd x(P, K);
  std::vector<std::string> bills;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != header.size())
      throw DataError(table.where(r) + ": dimension mismatch, expected " + std::to_string(names.size()) + " covariates");
    bills.push_back(row.front());
    if (prepend) x(r - 1, 0) = 1.0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      double v;
      if (!parse_double(row[c], v) || !std::isfinite(v))
        throw DataError(table.where(r) + ": invalid value '" + row[c] + "' for covariate '" + names[c - 1] + "'");
      x(r - 1, c - 1 + offset) = v;
    }
  }
  if (prepend) {
    names.insert(names.begin(), "intercept");
    intercept = 0;
  }
  std::vector<bool> simplex(K, false);
  for (std::size_t k = 0; k < K; ++k)
    simplex[k] = k != intercept && !simplex_prefix.empty() && names[k].rfind(simplex_prefix, 0) == 0;
  std::unordered_map<std::string, int> seen;
  for (const auto& b : bills)
    if (++seen[b] > 1) throw DataError(path + ": duplicate bill id '" + b + "'");
  return CovariateMatrix(std::move(bills), std::move(names), std::move(x), intercept, std::move(simplex));
}

inline std::string serialize_covariates(const CovariateMatrix& cov) {
  std::ostringstream out;
  DelimitedWriter w(out);
  std::vector<std::string> header{"bill"};
  header.insert(header.end(), cov.column_names().begin(), cov.column_names().end());
  w.row(header);
  for (std::size_t j = 0; j < cov.n_bills(); ++j) {
    std::vector<std::string> row{cov.bill_ids()[j]};
    for (std::size_t k = 0; k < cov.n_covariates(); ++k) row.push_back(format_double(cov.values()(j, k)));
    w.row(row);
  }
  return out.str();
}

inline void write_covariates(const std::string& path, const CovariateMatrix& cov) {
  write_text_file(path, serialize_covariates(cov));
}

/// Relative singular-value threshold below which the design is rank deficient.
inline constexpr double kRankTolerance = 1e-8;

/// Re-orders the design rows to the vote matrix's bill order (extra covariate
/// rows are dropped) and requires full column rank.
inline CovariateMatrix validate_covariates(const CovariateMatrix& cov, const VoteMatrix& votes) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < cov.n_bills(); ++j) index[cov.bill_ids()[j]] = j;
  const auto P = votes.n_bills();
  const auto K = cov.n_covariates();
  Eigen::MatrixXd x(P, K);
  for (std::size_t j = 0; j < P; ++j) {
    const auto it = index.find(votes.bill_ids()[j]);
    if (it == index.end()) throw DataError("bill '" + votes.bill_ids()[j] + "' has no covariate row");
    x.row(j) = cov.values().row(it->second);
  }
  CovariateMatrix aligned(votes.bill_ids(), cov.column_names(), std::move(x), cov.intercept_column(),
                          cov.simplex_columns());

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(aligned.values(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  std::vector<std::string> collinear;
  bool deficient = P < K;
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(K); ++r) {
    const double s = r < sv.size() ? sv(r) : 0.0;
    if (s > kRankTolerance * largest) continue;
    deficient = true;
    if (r >= svd.matrixV().cols()) continue;
    const auto v = svd.matrixV().col(r);
    const double vmax = v.cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < K; ++k) {
      if (std::abs(v(k)) > 1e-6 * vmax &&
          std::find(collinear.begin(), collinear.end(), cov.column_names()[k]) == collinear.end())
        collinear.push_back(cov.column_names()[k]);
    }
  }
  if (deficient) {
    std::string msg = "covariate design is rank deficient";
    if (!collinear.empty()) {
      msg += "; collinear columns:";
      for (const auto& c : collinear) msg += " " + c;
    }
    throw DataError(msg);
  }
  return aligned;
}

/// Legislator to party label assignment. Labels are opaque strings.
class PartyRoster {
 public:
  PartyRoster() = default;
  explicit PartyRoster(std::map<std::string, std::string> assignments) : assign_(std::move(assignments)) {}

  const std::string& party_of(const std::string& legislator) const {
    const auto it = assign_.find(legislator);
    if (it == assign_.end()) throw DataError("legislator '" + legislator + "' has no party label");
    return it->second;
  }

  bool contains(const std::string& legislator) const { return assign_.count(legislator) > 0; }

  std::vector<std::string> parties() const {
    std::vector<std::string> out;
    for (const auto& [id, p] : assign_)
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::map<std::string, std::string>& assignments() const { return assign_; }

  void require_covers(const std::vector<std::string>& legislators) const {
    for (const auto& id : legislators) party_of(id);
  }

 private:
  std::map<std::string, std::string> assign_;
};

/// Two columns (legislator id, party label) below a header row.
inline PartyRoster load_parties(const std::string& path) {
  const Table table = read_table(path);
  if (table.rows.size() < 2) throw DataError(path + ": no rows");
  std::map<std::string, std::string> assign;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 2) throw DataError(table.where(r) + ": expected two columns (legislator, party)");
    if (row[0].empty() || row[1].empty()) throw DataError(table.where(r) + ": empty legislator id or party label");
    if (!assign.emplace(row[0], row[1]).second)
      throw DataError(table.where(r) + ": legislator '" + row[0] + "' listed twice");
  }
  return PartyRoster(std::move(assign));
}

inline void write_parties(const std::string& path, const PartyRoster& roster,
                          const std::vector<std::string>& order) {
  std::ostringstream out;
  DelimitedWriter w(out);
  w.row(std::vector<std::string>{"legislator", "party"});
  for (const auto& id : order) w.row(std::vector<std::string>{id, roster.party_of(id)});
  write_text_file(path, out.str());
}

}  // namespace lsbeta
