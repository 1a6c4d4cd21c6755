#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lsbeta/config_io.hpp"
#include "lsbeta/delimited.hpp"
#include "lsbeta/error.hpp"
#include "lsbeta/sampler.hpp"

namespace lsbeta {

// Files making up a stored chain, relative to the chain directory.
inline const std::vector<std::string>& chain_files() {
  static const std::vector<std::string> files{"a.csv",   "b.csv",   "gamma.csv",         "sigma2.csv",
                                              "z.csv",   "w.csv",   "beta.csv",          "phi.csv",
                                              "log_posterior.csv", "acceptance.csv", "covariates.csv",
                                              "chain_info.txt"};
  return files;
}

namespace detail {

template <typename RowFn>
std::string draw_table(const std::vector<std::string>& header, std::size_t n, RowFn&& fill) {
  std::ostringstream out;
  DelimitedWriter w(out);
  std::vector<std::string> h{"draw"};
  h.insert(h.end(), header.begin(), header.end());
  w.row(h);
  std::vector<std::string> cells;
  for (std::size_t l = 0; l < n; ++l) {
    cells.assign(1, std::to_string(l));
    fill(l, cells);
    w.row(cells);
  }
  return out.str();
}

inline std::vector<std::string> indexed(const std::vector<std::string>& ids, const std::vector<std::string>& suffix) {
  std::vector<std::string> out;
  for (const auto& id : ids)
    for (const auto& s : suffix) out.push_back(id + ":" + s);
  return out;
}

inline std::vector<std::string> dim_labels(int S) {
  std::vector<std::string> out;
  for (int s = 1; s <= S; ++s) out.push_back(std::to_string(s));
  return out;
}

// Draw rows of a stored table as doubles, checking the width.
inline std::vector<std::vector<double>> read_draws(const std::filesystem::path& path, std::size_t width,
                                                   std::vector<std::string>* header = nullptr) {
  if (!std::filesystem::exists(path)) throw DataError("no draws: missing '" + path.string() + "'");
  const Table t = read_table(path.string());
  if (t.rows.empty()) throw DataError("no draws: '" + path.string() + "' is empty");
  if (header) header->assign(t.rows[0].begin() + 1, t.rows[0].end());
  if (width != 0 && t.rows[0].size() != width + 1)
    throw DataError(t.where(0) + ": expected " + std::to_string(width + 1) + " columns");
  std::vector<std::vector<double>> out;
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.rows[0].size()) throw DataError(t.where(r) + ": ragged row");
    std::vector<double> row;
    for (std::size_t c = 1; c < t.rows[r].size(); ++c) {
      double v;
      if (!parse_double(t.rows[r][c], v)) throw DataError(t.where(r) + ": bad number '" + t.rows[r][c] + "'");
      row.push_back(v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("no draws: missing '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[std::string(trim(std::string_view(line).substr(0, eq)))] = std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  return kv;
}

}  // namespace detail

/// Serialises a chain into `dir` (which must exist). Only shortest
/// round-trip number formatting is used so read_chain restores every value
/// bit for bit.
inline std::map<std::string, std::string> serialize_chain(const ChainOutput& c) {
  const std::size_t L = c.size();
  const int S = c.latent_dim;
  std::map<std::string, std::string> files;
  files["a.csv"] = detail::draw_table(c.legislator_ids, L, [&](std::size_t l, auto& cells) {
    for (Eigen::Index i = 0; i < c.lsirm[l].a.size(); ++i) cells.push_back(format_double(c.lsirm[l].a(i)));
  });
  files["b.csv"] = detail::draw_table(c.bill_ids, L, [&](std::size_t l, auto& cells) {
    for (Eigen::Index j = 0; j < c.lsirm[l].b.size(); ++j) cells.push_back(format_double(c.lsirm[l].b(j)));
  });
  files["gamma.csv"] = detail::draw_table({"log_gamma", "gamma"}, L, [&](std::size_t l, auto& cells) {
    cells.push_back(format_double(c.lsirm[l].log_gamma));
    cells.push_back(format_double(c.lsirm[l].gamma()));
  });
  files["sigma2.csv"] = detail::draw_table({"sigma2_a", "sigma2_b"}, L, [&](std::size_t l, auto& cells) {
    cells.push_back(format_double(c.lsirm[l].sigma2_a));
    cells.push_back(format_double(c.lsirm[l].sigma2_b));
  });
  auto matrix_rows = [](const Eigen::MatrixXd& M, auto& cells) {
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index s = 0; s < M.cols(); ++s) cells.push_back(format_double(M(r, s)));
  };
  files["z.csv"] = detail::draw_table(detail::indexed(c.legislator_ids, detail::dim_labels(S)), L,
                                      [&](std::size_t l, auto& cells) { matrix_rows(c.lsirm[l].Z, cells); });
  files["w.csv"] = detail::draw_table(detail::indexed(c.bill_ids, detail::dim_labels(S)), L,
                                      [&](std::size_t l, auto& cells) { matrix_rows(c.lsirm[l].W, cells); });
  files["beta.csv"] = detail::draw_table(detail::indexed(c.legislator_ids, c.covariate_names), L,
                                         [&](std::size_t l, auto& cells) { matrix_rows(c.regression[l].B, cells); });
  files["phi.csv"] = detail::draw_table({"phi"}, L, [&](std::size_t l, auto& cells) {
    cells.push_back(format_double(c.regression[l].phi));
  });
  files["log_posterior.csv"] = detail::draw_table({"log_posterior"}, L, [&](std::size_t l, auto& cells) {
    cells.push_back(format_double(c.log_posterior[l]));
  });

  std::ostringstream acc;
  DelimitedWriter aw(acc);
  aw.row(std::vector<std::string>{"block", "acceptance_rate", "final_scale"});
  const double scales[kNumBlocks] = {c.final_scales.a, c.final_scales.b,    c.final_scales.log_gamma,
                                     c.final_scales.z, c.final_scales.w,    c.final_scales.beta,
                                     c.final_scales.log_phi};
  for (std::size_t k = 0; k < kNumBlocks; ++k)
    aw.row(std::vector<std::string>{kBlockNames[k], format_double(c.acceptance_rates[k]), format_double(scales[k])});
  files["acceptance.csv"] = acc.str();

  std::ostringstream cov;
  cov << "covariate\n";
  for (const auto& n : c.covariate_names) cov << n << '\n';
  files["covariates.csv"] = cov.str();

  std::ostringstream info;
  info << "n_draws = " << L << '\n'
       << "latent_dim = " << S << '\n'
       << "transform = " << to_string(c.transform) << '\n'
       << "seed = " << c.seed << '\n'
       << "imputation_seed = " << c.imputation_seed << '\n'
       << "nonfinite_rejections = " << c.nonfinite_rejections << '\n';
  files["chain_info.txt"] = info.str();
  return files;
}

inline void write_chain(const std::filesystem::path& dir, const ChainOutput& chain) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : serialize_chain(chain)) write_text_file((dir / name).string(), content);
}

inline ChainOutput read_chain(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("no draws: '" + dir.string() + "' is not a chain directory");
  ChainOutput c;
  const auto info = detail::read_key_values(dir / "chain_info.txt");
  auto get = [&](const char* key) {
    const auto it = info.find(key);
    if (it == info.end()) throw DataError("chain_info.txt: missing '" + std::string(key) + "'");
    return it->second;
  };
  c.latent_dim = static_cast<int>(detail::to_long("latent_dim", get("latent_dim")));
  c.transform = parse_transform(get("transform"));
  c.seed = std::stoull(get("seed"));
  c.imputation_seed = std::stoull(get("imputation_seed"));
  c.nonfinite_rejections = detail::to_long("nonfinite_rejections", get("nonfinite_rejections"));
  const auto n_draws = static_cast<std::size_t>(detail::to_long("n_draws", get("n_draws")));

  {
    const Table t = read_table((dir / "covariates.csv").string());
    for (std::size_t r = 1; r < t.rows.size(); ++r) c.covariate_names.push_back(t.rows[r].at(0));
  }
  const auto a = detail::read_draws(dir / "a.csv", 0, &c.legislator_ids);
  const auto b = detail::read_draws(dir / "b.csv", 0, &c.bill_ids);
  const std::size_t N = c.legislator_ids.size(), P = c.bill_ids.size(), K = c.covariate_names.size();
  const auto S = static_cast<std::size_t>(c.latent_dim);
  const auto g = detail::read_draws(dir / "gamma.csv", 2);
  const auto s2 = detail::read_draws(dir / "sigma2.csv", 2);
  const auto z = detail::read_draws(dir / "z.csv", N * S);
  const auto w = detail::read_draws(dir / "w.csv", P * S);
  const auto beta = detail::read_draws(dir / "beta.csv", N * K);
  const auto phi = detail::read_draws(dir / "phi.csv", 1);
  const auto lp = detail::read_draws(dir / "log_posterior.csv", 1);
  for (std::size_t n : {a.size(), b.size(), g.size(), s2.size(), z.size(), w.size(), beta.size(), phi.size(), lp.size()})
    if (n != n_draws) throw DataError("chain files in '" + dir.string() + "' disagree on the number of draws");

  for (std::size_t l = 0; l < n_draws; ++l) {
    LsirmState s;
    s.a = Eigen::Map<const Eigen::VectorXd>(a[l].data(), static_cast<Eigen::Index>(N));
    s.b = Eigen::Map<const Eigen::VectorXd>(b[l].data(), static_cast<Eigen::Index>(P));
    s.log_gamma = g[l][0];
    s.sigma2_a = s2[l][0];
    s.sigma2_b = s2[l][1];
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    s.Z = Eigen::Map<const RowMajor>(z[l].data(), static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(S));
    s.W = Eigen::Map<const RowMajor>(w[l].data(), static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(S));
    RegressionState r;
    r.B = Eigen::Map<const RowMajor>(beta[l].data(), static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(K));
    r.phi = phi[l][0];
    c.lsirm.push_back(std::move(s));
    c.regression.push_back(std::move(r));
    c.log_posterior.push_back(lp[l][0]);
  }

  const Table acc = read_table((dir / "acceptance.csv").string());
  for (std::size_t r = 1; r < acc.rows.size(); ++r) {
    for (std::size_t k = 0; k < kNumBlocks; ++k) {
      if (acc.rows[r].at(0) != kBlockNames[k]) continue;
      double rate = 0.0, scale = 0.0;
      parse_double(acc.rows[r].at(1), rate);
      parse_double(acc.rows[r].at(2), scale);
      c.acceptance_rates[k] = rate;
      double* targets[kNumBlocks] = {&c.final_scales.a, &c.final_scales.b,    &c.final_scales.log_gamma,
                                     &c.final_scales.z, &c.final_scales.w,    &c.final_scales.beta,
                                     &c.final_scales.log_phi};
      *targets[k] = scale;
    }
  }
  return c;
}

}  // namespace lsbeta
