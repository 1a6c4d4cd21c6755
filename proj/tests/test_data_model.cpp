#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace lsbeta;
using testing_support::TempDir;

namespace {

VoteMatrix make_votes(std::size_t N, std::size_t P, const std::function<Vote(std::size_t, std::size_t)>& f) {
  std::vector<std::string> leg, bill;
  for (std::size_t i = 0; i < N; ++i) leg.push_back("L" + std::to_string(i));
  for (std::size_t j = 0; j < P; ++j) bill.push_back("B" + std::to_string(j));
  std::vector<Vote> cells;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < P; ++j) cells.push_back(f(i, j));
  return VoteMatrix(leg, bill, cells);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(LoadVotes, CategoricalTokensFollowTheCoding) {
  TempDir dir;
  const auto path = dir.file("v.csv", "id,b1,b2,b3\nL1,Yea,Nay,Abstention\nL2,Nay,Yea,Barred\n");
  const VoteMatrix v = load_votes(path, VoteCoding::categorical());
  EXPECT_EQ(v(0, 0), Vote::Yea);
  EXPECT_EQ(v(0, 1), Vote::NotYea);
  EXPECT_EQ(v(0, 2), Vote::NotYea);
  EXPECT_EQ(v(1, 2), Vote::Missing);
}

TEST(LoadVotes, EmptyFileHasNoRows) {
  TempDir dir;
  const auto path = dir.file("empty.csv", "");
  EXPECT_NE(error_of([&] { load_votes(path); }).find("no rows"), std::string::npos);
}

TEST(LoadVotes, SingleNaTokenGivesOneMissingCell) {
  TempDir dir;
  const auto path = dir.file("v.csv", "legislator,b1,b2\nL1,1,NA\nL2,0,1\n");
  const VoteMatrix v = load_votes(path);
  EXPECT_EQ(v.n_legislators(), 2u);
  EXPECT_EQ(v.n_bills(), 2u);
  EXPECT_EQ(v.n_missing(), 1u);
  EXPECT_TRUE(v.missing(0, 1));
}

TEST(LoadVotes, TabDelimitedFilesAreAccepted) {
  TempDir dir;
  const auto path = dir.file("v.tsv", "legislator\tb1\tb2\nL1\t1\t0\nL2\t0\t1\n");
  EXPECT_EQ(load_votes(path)(1, 1), Vote::Yea);
}

TEST(LoadVotes, DimensionMismatchNamesTheLine) {
  TempDir dir;
  const auto path = dir.file("v.csv", "legislator,b1,b2\nL1,1,0\nL2,1\n");
  const auto msg = error_of([&] { load_votes(path); });
  EXPECT_NE(msg.find("dimension mismatch"), std::string::npos);
  EXPECT_NE(msg.find(":3"), std::string::npos);
}

TEST(LoadVotes, UnknownTokenIsRejectedWithContext) {
  TempDir dir;
  const auto path = dir.file("v.csv", "legislator,b1,b2\nL1,1,0\nL2,yes,1\n");
  const auto msg = error_of([&] { load_votes(path); });
  EXPECT_NE(msg.find("unknown token 'yes'"), std::string::npos);
  EXPECT_NE(msg.find("L2"), std::string::npos);
  EXPECT_NE(msg.find("b1"), std::string::npos);
}

TEST(LoadVotes, AllMissingRowOrColumnIsRejected) {
  TempDir dir;
  auto msg = error_of([&] { load_votes(dir.file("r.csv", "legislator,b1,b2\nL1,NA,NA\nL2,0,1\n")); });
  EXPECT_NE(msg.find("legislator 'L1'"), std::string::npos);
  msg = error_of([&] { load_votes(dir.file("c.csv", "legislator,b1,b2\nL1,NA,1\nL2,NA,1\n")); });
  EXPECT_NE(msg.find("bill 'b1'"), std::string::npos);
}

TEST(VoteMatrix, ConstructorChecksDimensionsAndIds) {
  EXPECT_THROW(VoteMatrix({"a"}, {"x", "y"}, {Vote::Yea}), DataError);
  EXPECT_THROW(VoteMatrix({"a", "a"}, {"x"}, {Vote::Yea, Vote::Yea}), DataError);
  EXPECT_THROW(VoteMatrix({"a"}, {"x"}, {static_cast<Vote>(7)}), DataError);
}

TEST(LoadVotes, SerializeRoundTripsAllStates) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> pick(0, 2);
  const VoteMatrix v = make_votes(6, 9, [&](std::size_t i, std::size_t j) {
    if (j == 0) return i % 2 ? Vote::Yea : Vote::NotYea;  // keeps coverage
    if (i == 0) return Vote::Yea;
    return static_cast<Vote>(pick(gen));
  });
  TempDir dir;
  write_votes(dir / "v.csv", v);
  const VoteMatrix back = load_votes(dir / "v.csv");
  EXPECT_EQ(back, v);
  EXPECT_EQ(serialize_votes(back), serialize_votes(v));
}

TEST(FilterLopsided, RemovesNearUnanimousBills) {
  // bill 0: 99/100 yea, bill 1: 50/100, bill 2: 1 missing, rest yea
  const VoteMatrix v = make_votes(100, 2, [](std::size_t i, std::size_t j) {
    if (j == 0) return i == 0 ? Vote::NotYea : Vote::Yea;
    return i % 2 ? Vote::Yea : Vote::NotYea;
  });
  const auto r = filter_lopsided(v, 0.025, 0.975);
  ASSERT_EQ(r.removed_bill_ids.size(), 1u);
  EXPECT_EQ(r.removed_bill_ids[0], "B0");
  EXPECT_EQ(r.votes.bill_ids(), std::vector<std::string>{"B1"});
}

TEST(FilterLopsided, VacuousBoundsAreIdentity) {
  const VoteMatrix v = make_votes(5, 4, [](std::size_t i, std::size_t j) { return (i + j) % 3 ? Vote::Yea : Vote::NotYea; });
  const auto r = filter_lopsided(v, 0.0, 1.0);
  EXPECT_EQ(r.votes, v);
  EXPECT_TRUE(r.removed_bill_ids.empty());
}

TEST(FilterLopsided, MissingCellsAreNotInTheDenominator) {
  // 39 yea, 1 nay, 60 missing: 0.975 among voters -> kept at hi=0.975
  const VoteMatrix v = make_votes(100, 2, [](std::size_t i, std::size_t j) {
    if (j == 1) return i % 2 ? Vote::Yea : Vote::NotYea;
    if (i < 39) return Vote::Yea;
    if (i == 39) return Vote::NotYea;
    return Vote::Missing;
  });
  EXPECT_TRUE(filter_lopsided(v, 0.025, 0.975).removed_bill_ids.empty());
  // counting missing as non-support flips the rate to 0.39
  EXPECT_TRUE(filter_lopsided(v, 0.4, 1.0, RateDenominator::AllCells).removed_bill_ids.size() == 1);
}

TEST(FilterLopsided, EmptyAgendaAndBadBounds) {
  const VoteMatrix v = make_votes(3, 2, [](std::size_t, std::size_t) { return Vote::Yea; });
  EXPECT_NE(error_of([&] { filter_lopsided(v, 0.025, 0.975); }).find("empty agenda"), std::string::npos);
  EXPECT_THROW(filter_lopsided(v, 0.5, 0.5), ConfigError);
  EXPECT_THROW(filter_lopsided(v, -0.1, 0.5), ConfigError);
}

TEST(FilterLopsided, IsIdempotent) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> rate(30);
    for (auto& r : rate) r = U(gen) < 0.3 ? (U(gen) < 0.5 ? 0.005 : 0.995) : U(gen);
    const VoteMatrix v = make_votes(60, 30, [&](std::size_t i, std::size_t j) {
      if (i == 0) return Vote::Yea;
      if (i == 1) return Vote::NotYea;
      return U(gen) < 0.1 ? Vote::Missing : (U(gen) < rate[j] ? Vote::Yea : Vote::NotYea);
    });
    const auto once = filter_lopsided(v, 0.1, 0.9);
    const auto twice = filter_lopsided(once.votes, 0.1, 0.9);
    EXPECT_EQ(twice.votes, once.votes);
    EXPECT_TRUE(twice.removed_bill_ids.empty());
  }
}

TEST(EffectiveParties, ClosedForms) {
  EXPECT_DOUBLE_EQ(effective_parties({0.5, 0.5}), 2.0);
  EXPECT_DOUBLE_EQ(effective_parties({1.0}), 1.0);
  for (int k = 1; k <= 9; ++k) EXPECT_NEAR(effective_parties(std::vector<double>(k, 1.0 / k)), k, 1e-12);
}

TEST(EffectiveParties, PermutationInvariant) {
  std::vector<double> s{0.4, 0.3, 0.2, 0.1};
  const double base = effective_parties(s);
  std::sort(s.begin(), s.end());
  do {
    EXPECT_NEAR(effective_parties(s), base, 1e-14);
  } while (std::next_permutation(s.begin(), s.end()));
}

TEST(EffectiveParties, InvalidShares) {
  EXPECT_THROW(effective_parties({0.6, -0.1, 0.5}), ConfigError);
  EXPECT_THROW(effective_parties({0.0, 0.0}), ConfigError);
  EXPECT_THROW(effective_parties({0.5, 0.4}), ConfigError);
  EXPECT_THROW(effective_parties_from_seats({0.0, 0.0}), ConfigError);
  EXPECT_NEAR(effective_parties_from_seats({10, 10, 10}), 3.0, 1e-12);
}

namespace {

// intercept + n topic proportions derived from n+1 simplex draws
std::string covariate_csv(std::size_t P, std::size_t n_topics, bool all_topics, std::mt19937_64& gen,
                          std::vector<std::string>* order = nullptr) {
  std::gamma_distribution<double> G(1.0, 1.0);
  std::ostringstream out;
  out << "bill,intercept";
  const std::size_t cols = all_topics ? n_topics + 1 : n_topics;
  for (std::size_t k = 0; k < cols; ++k) out << ",topic_" << k + 1;
  out << '\n';
  std::vector<std::size_t> idx(P);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), gen);
  for (std::size_t j : idx) {
    std::vector<double> g(n_topics + 1);
    double tot = 0;
    for (auto& v : g) tot += (v = G(gen));
    out << "B" << j << ",1";
    for (std::size_t k = 0; k < cols; ++k) out << ',' << format_double(g[k] / tot);
    out << '\n';
    if (order) order->push_back("B" + std::to_string(j));
  }
  return out.str();
}

}  // namespace

TEST(ValidateCovariates, ReferenceCodedDesignIsAccepted) {
  std::mt19937_64 gen(5);
  TempDir dir;
  const auto cov = load_covariates(dir.file("x.csv", covariate_csv(40, 7, false, gen)));
  const VoteMatrix v = make_votes(3, 40, [](std::size_t i, std::size_t j) { return (i + j) % 2 ? Vote::Yea : Vote::NotYea; });
  const auto x = validate_covariates(cov, v);
  EXPECT_EQ(x.n_covariates(), 8u);
  for (std::size_t j = 0; j < x.n_bills(); ++j) EXPECT_EQ(x.values()(j, 0), 1.0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(x.values());
  EXPECT_EQ(lu.rank(), 8);
}

TEST(ValidateCovariates, FullSimplexIsCollinear) {
  std::mt19937_64 gen(6);
  TempDir dir;
  const auto cov = load_covariates(dir.file("x.csv", covariate_csv(40, 7, true, gen)));
  const VoteMatrix v = make_votes(3, 40, [](std::size_t i, std::size_t j) { return (i + j) % 2 ? Vote::Yea : Vote::NotYea; });
  const auto msg = error_of([&] { validate_covariates(cov, v); });
  EXPECT_NE(msg.find("collinear columns:"), std::string::npos);
  EXPECT_NE(msg.find("intercept"), std::string::npos);
  EXPECT_NE(msg.find("topic_8"), std::string::npos);
}

TEST(ValidateCovariates, RowsAreReorderedToVoteOrder) {
  std::mt19937_64 gen(7);
  TempDir dir;
  std::vector<std::string> file_order;
  const auto cov = load_covariates(dir.file("x.csv", covariate_csv(12, 3, false, gen, &file_order)));
  const VoteMatrix v = make_votes(2, 12, [](std::size_t i, std::size_t j) { return (i + j) % 2 ? Vote::Yea : Vote::NotYea; });
  const auto x = validate_covariates(cov, v);
  EXPECT_EQ(x.bill_ids(), v.bill_ids());
  for (std::size_t j = 0; j < x.n_bills(); ++j) {
    const auto it = std::find(cov.bill_ids().begin(), cov.bill_ids().end(), x.bill_ids()[j]);
    const auto src = static_cast<Eigen::Index>(it - cov.bill_ids().begin());
    EXPECT_EQ(x.values().row(static_cast<Eigen::Index>(j)), cov.values().row(src));
  }
}

TEST(ValidateCovariates, MissingBillRowIsAnError) {
  std::mt19937_64 gen(8);
  TempDir dir;
  const auto cov = load_covariates(dir.file("x.csv", covariate_csv(5, 2, false, gen)));
  const VoteMatrix v = make_votes(2, 6, [](std::size_t i, std::size_t j) { return (i + j) % 2 ? Vote::Yea : Vote::NotYea; });
  EXPECT_NE(error_of([&] { validate_covariates(cov, v); }).find("B5"), std::string::npos);
}

TEST(CovariateMatrix, InvariantsAreEnforced) {
  Eigen::MatrixXd x(2, 3);
  x << 1, 0.5, 0.3, 1, 0.2, 0.2;
  EXPECT_NO_THROW(CovariateMatrix({"a", "b"}, {"intercept", "t1", "t2"}, x, 0, {false, true, true}));
  Eigen::MatrixXd bad = x;
  bad(1, 0) = 0.9;
  EXPECT_THROW(CovariateMatrix({"a", "b"}, {"intercept", "t1", "t2"}, bad, 0, {false, true, true}), DataError);
  bad = x;
  bad(0, 1) = 0.8;
  EXPECT_THROW(CovariateMatrix({"a", "b"}, {"intercept", "t1", "t2"}, bad, 0, {false, true, true}), DataError);
  bad = x;
  bad(0, 2) = std::nan("");
  EXPECT_THROW(CovariateMatrix({"a", "b"}, {"intercept", "t1", "t2"}, bad, 0, {false, true, true}), DataError);
}

TEST(LoadCovariates, InterceptIsPrependedWhenAbsent) {
  TempDir dir;
  const auto cov = load_covariates(dir.file("x.csv", "bill,topic_1,size\nB1,0.2,3\nB2,0.7,1\n"));
  EXPECT_EQ(cov.column_names(), (std::vector<std::string>{"intercept", "topic_1", "size"}));
  EXPECT_EQ(cov.values()(1, 0), 1.0);
  EXPECT_EQ(cov.simplex_columns(), (std::vector<bool>{false, true, false}));
  const auto back = load_covariates(dir.file("y.csv", serialize_covariates(cov)));
  EXPECT_EQ(back.values(), cov.values());
}

TEST(Parties, LoadAndCoverage) {
  TempDir dir;
  const auto roster = load_parties(dir.file("p.csv", "legislator,party\nL1,UP\nL2,GNP\nL3,Independent\n"));
  EXPECT_EQ(roster.party_of("L3"), "Independent");
  EXPECT_EQ(roster.parties(), (std::vector<std::string>{"GNP", "Independent", "UP"}));
  EXPECT_NO_THROW(roster.require_covers({"L1", "L2"}));
  EXPECT_THROW(roster.require_covers({"L4"}), DataError);
  EXPECT_THROW(load_parties(dir.file("d.csv", "legislator,party\nL1,UP\nL1,GNP\n")), DataError);
  EXPECT_THROW(load_parties(dir.file("w.csv", "legislator,party\nL1,UP,extra\n")), DataError);
}

TEST(ModelConfig, ValidationRules) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  c.latent_dim = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.sigma2_gamma = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.burn_in = c.iterations + 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.scales.z = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.thin = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
