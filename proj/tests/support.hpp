#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "lsbeta/lsbeta.hpp"

namespace testing_support {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lsbeta_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Random tiny problem: votes with some missing cells, a reference-coded
// topic design, and arbitrary (finite) states.
struct TinyProblem {
  lsbeta::VoteMatrix votes;
  lsbeta::CovariateMatrix X;
  lsbeta::LsirmState ls;
  lsbeta::RegressionState reg;
};

inline TinyProblem random_tiny(std::mt19937_64& gen, std::size_t N, std::size_t P, int S, std::size_t K,
                               double missing = 0.2) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> Z(0.0, 1.0);
  std::vector<std::string> leg, bill;
  for (std::size_t i = 0; i < N; ++i) leg.push_back("L" + std::to_string(i));
  for (std::size_t j = 0; j < P; ++j) bill.push_back("B" + std::to_string(j));
  std::vector<lsbeta::Vote> cells(N * P);
  for (auto& c : cells) c = U(gen) < missing ? lsbeta::Vote::Missing : (U(gen) < 0.5 ? lsbeta::Vote::Yea : lsbeta::Vote::NotYea);
  TinyProblem t;
  t.votes = lsbeta::VoteMatrix(leg, bill, cells);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(K));
  std::vector<std::string> names{"intercept"};
  std::vector<bool> simplex{false};
  for (std::size_t k = 1; k < K; ++k) names.push_back("topic_" + std::to_string(k)), simplex.push_back(true);
  for (std::size_t j = 0; j < P; ++j) {
    std::vector<double> g(K);
    double tot = 0.0;
    for (auto& v : g) tot += (v = -std::log(U(gen)));
    x(j, 0) = 1.0;
    for (std::size_t k = 1; k < K; ++k) x(j, k) = g[k - 1] / tot;
  }
  t.X = lsbeta::CovariateMatrix(bill, names, x, 0, simplex);
  t.ls.a = Eigen::VectorXd::NullaryExpr(N, [&] { return Z(gen); });
  t.ls.b = Eigen::VectorXd::NullaryExpr(P, [&] { return Z(gen); });
  t.ls.Z = Eigen::MatrixXd::NullaryExpr(N, S, [&] { return Z(gen); });
  t.ls.W = Eigen::MatrixXd::NullaryExpr(P, S, [&] { return Z(gen); });
  t.ls.log_gamma = 0.5 * Z(gen);
  t.ls.sigma2_a = 0.5 + U(gen);
  t.ls.sigma2_b = 0.5 + U(gen);
  t.reg.B = Eigen::MatrixXd::NullaryExpr(N, K, [&] { return 0.5 * Z(gen); });
  t.reg.phi = 1.0 + 10.0 * U(gen);
  return t;
}

}  // namespace testing_support
