#include <gtest/gtest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace lsbeta;

namespace {

Eigen::MatrixXd rotation2(double theta, bool reflect = false) {
  Eigen::MatrixXd R(2, 2);
  R << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  if (reflect) R.row(1) *= -1.0;
  return R;
}

std::vector<std::array<double, 2>> points(const Eigen::MatrixXd& M) {
  std::vector<std::array<double, 2>> v;
  for (Eigen::Index r = 0; r < M.rows(); ++r) v.push_back({M(r, 0), M(r, 1)});
  return v;
}

Eigen::MatrixXd random_points(std::mt19937_64& gen, Eigen::Index n, Eigen::Index S) {
  std::normal_distribution<double> N01;
  return Eigen::MatrixXd::NullaryExpr(n, S, [&] { return N01(gen); });
}

// Chain of L draws over N legislators with coefficient rows given per draw.
ChainOutput coefficient_chain(const std::vector<Eigen::MatrixXd>& B, std::vector<std::string> ids,
                              std::vector<std::string> covs) {
  ChainOutput c;
  std::mt19937_64 gen(7);
  for (std::size_t l = 0; l < B.size(); ++l) {
    LsirmState s;
    s.a = Eigen::VectorXd::Zero(B[l].rows());
    s.b = Eigen::VectorXd::Zero(3);
    s.Z = random_points(gen, B[l].rows(), 2);
    s.W = random_points(gen, 3, 2);
    s.sigma2_a = s.sigma2_b = 1.0;
    c.lsirm.push_back(s);
    c.regression.push_back({B[l], 5.0});
    c.log_posterior.push_back(-static_cast<double>(l));
  }
  c.legislator_ids = std::move(ids);
  c.covariate_names = std::move(covs);
  c.bill_ids = {"B1", "B2", "B3"};
  c.latent_dim = 2;
  return c;
}

Eigen::MatrixXd col(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index k = 0;
  for (double x : v) m(k++, 0) = x;
  return m;
}

}  // namespace

TEST(Procrustes, IdentityIsAFixedPoint) {
  std::mt19937_64 gen(41);
  const Eigen::MatrixXd X = centered(random_points(gen, 8, 3));
  const auto fit = procrustes_fit(X, X);
  EXPECT_LT((fit.rotation - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LT(fit.objective, 1e-20);
  EXPECT_FALSE(fit.degenerate);
}

TEST(Procrustes, RecoversRotationAndTranslation) {
  std::mt19937_64 gen(42);
  const Eigen::MatrixXd ref = centered(random_points(gen, 10, 2));
  Eigen::RowVectorXd shift(2);
  shift << 4.0, -3.0;
  for (bool reflect : {false, true}) {
    const Eigen::MatrixXd moved = (ref * rotation2(M_PI / 2, reflect)).rowwise() + shift;
    const auto fit = procrustes_fit(moved, ref);
    EXPECT_LT(((moved.rowwise() - fit.center) * fit.rotation - ref).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((fit.rotation.transpose() * fit.rotation - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-12);
  }
}

TEST(Procrustes, ObjectiveMatchesAngleGridSearch) {
  std::mt19937_64 gen(43);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd X = random_points(gen, 7, 2), Ref = centered(random_points(gen, 7, 2));
    EXPECT_NEAR(procrustes_fit(X, Ref).objective, naive::procrustes_grid_objective(points(X), points(Ref)), 1e-6);
  }
}

TEST(Procrustes, DegenerateConfigurationKeepsIdentity) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Constant(4, 2, 1.5);
  const auto fit = procrustes_fit(X, centered(Eigen::MatrixXd::Random(4, 2)));
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.rotation, Eigen::MatrixXd::Identity(2, 2));
}

TEST(ProcrustesAlign, PreservesEveryLegislatorBillDistance) {
  std::mt19937_64 gen(44);
  for (int S : {1, 2, 3}) {
    ChainOutput c;
    for (int l = 0; l < 6; ++l) {
      auto t = testing_support::random_tiny(gen, 5, 4, S, 2);
      c.lsirm.push_back(t.ls);
      c.regression.push_back(t.reg);
      c.log_posterior.push_back(std::normal_distribution<double>()(gen));
    }
    const auto aligned = procrustes_align(c);
    EXPECT_EQ(aligned.reference_index, map_draw_index(c));
    for (std::size_t l = 0; l < c.size(); ++l) {
      EXPECT_LT((distance_matrix(aligned.chain.lsirm[l]) - distance_matrix(c.lsirm[l])).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_EQ(aligned.chain.lsirm[l].a, c.lsirm[l].a);
    }
    const auto& ref = aligned.chain.lsirm[aligned.reference_index];
    EXPECT_LT((stacked_positions(ref) - aligned.reference).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(stacked_positions(ref).colwise().mean().norm(), 1e-12);
  }
}

TEST(ProcrustesAlign, RigidlyMovedDrawsCollapseOntoReference) {
  std::mt19937_64 gen(45);
  auto t = testing_support::random_tiny(gen, 6, 5, 2, 2);
  ChainOutput c;
  for (int l = 0; l < 5; ++l) {
    LsirmState s = t.ls;
    const Eigen::MatrixXd R = rotation2(0.7 * l, l % 2 == 1);
    Eigen::RowVectorXd shift(2);
    shift << l, -2.0 * l;
    s.Z = (t.ls.Z * R).rowwise() + shift;
    s.W = (t.ls.W * R).rowwise() + shift;
    c.lsirm.push_back(s);
    c.regression.push_back(t.reg);
    c.log_posterior.push_back(l == 2 ? 0.0 : -1.0);
  }
  const auto aligned = procrustes_align(c);
  EXPECT_EQ(aligned.reference_index, 2u);
  for (const auto& s : aligned.chain.lsirm)
    EXPECT_LT((stacked_positions(s) - aligned.reference).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ProcrustesAlign, EmptyChainRaises) { EXPECT_THROW(procrustes_align(ChainOutput{}), ConfigError); }

TEST(CoefficientSummaries, ClosedFormExample) {
  // three legislators, two parties; one covariate, two draws
  auto c = coefficient_chain({col({1, 2, 10}), col({3, 4, 14})}, {"L1", "L2", "L3"}, {"intercept"});
  PartyRoster roster({{"L1", "A"}, {"L2", "A"}, {"L3", "B"}});
  ModelConfig cfg;
  const auto s = coefficient_summaries(procrustes_align(c), roster, cfg);
  EXPECT_DOUBLE_EQ(s.post_mean(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.post_mean(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(s.post_mean(2, 0), 12.0);
  EXPECT_NEAR(s.lower(0, 0), 1.05, 1e-12);
  EXPECT_NEAR(s.upper(0, 0), 2.95, 1e-12);
  EXPECT_EQ(s.parties, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(s.party_size, (std::vector<std::size_t>{2, 1}));
  EXPECT_DOUBLE_EQ(s.party_mean(0, 0), 2.5);
  EXPECT_NEAR(s.party_sd(0, 0), std::sqrt(0.5), 1e-14);
  EXPECT_TRUE(std::isnan(s.party_sd(1, 0)));  // single member
  EXPECT_EQ(s.party_a, "A");
  EXPECT_EQ(s.party_b, "B");
  EXPECT_DOUBLE_EQ(s.mean_difference(0), -9.5);
  EXPECT_NEAR(s.between_sd(0), std::sqrt(91.0 / 3.0), 1e-12);
}

TEST(CoefficientSummaries, IntervalsBracketThePosteriorMean) {
  std::mt19937_64 gen(46);
  std::normal_distribution<double> N01;
  std::vector<Eigen::MatrixXd> B;
  for (int l = 0; l < 200; ++l) B.push_back(Eigen::MatrixXd::NullaryExpr(4, 2, [&] { return N01(gen); }));
  auto c = coefficient_chain(B, {"L1", "L2", "L3", "L4"}, {"intercept", "topic_1"});
  PartyRoster roster({{"L1", "A"}, {"L2", "A"}, {"L3", "B"}, {"L4", "B"}});
  ModelConfig cfg;
  cfg.cred_level = 0.9;
  const auto s = coefficient_summaries(procrustes_align(c), roster, cfg);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index k = 0; k < 2; ++k) {
      EXPECT_LE(s.lower(i, k), s.post_mean(i, k));
      EXPECT_GE(s.upper(i, k), s.post_mean(i, k));
      std::size_t inside = 0;
      for (const auto& b : B) inside += b(i, k) >= s.lower(i, k) && b(i, k) <= s.upper(i, k);
      EXPECT_NEAR(static_cast<double>(inside) / 200.0, 0.9, 0.011);
    }
}

TEST(CoefficientSummaries, InvariantToDrawOrder) {
  std::mt19937_64 gen(47);
  std::normal_distribution<double> N01;
  std::vector<Eigen::MatrixXd> B;
  for (int l = 0; l < 31; ++l) B.push_back(Eigen::MatrixXd::NullaryExpr(3, 2, [&] { return N01(gen); }));
  auto shuffled = B;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  PartyRoster roster({{"L1", "A"}, {"L2", "B"}, {"L3", "B"}});
  ModelConfig cfg;
  const auto s1 = coefficient_summaries(procrustes_align(coefficient_chain(B, {"L1", "L2", "L3"}, {"i", "t"})), roster, cfg);
  const auto s2 =
      coefficient_summaries(procrustes_align(coefficient_chain(shuffled, {"L1", "L2", "L3"}, {"i", "t"})), roster, cfg);
  EXPECT_LT((s1.post_mean - s2.post_mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(s1.lower, s2.lower);
  EXPECT_EQ(s1.upper, s2.upper);
  EXPECT_LT((s1.mean_difference - s2.mean_difference).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CoefficientSummaries, PartyWithoutFittedMembersIsUndefined) {
  auto c = coefficient_chain({col({1, 2}), col({2, 3})}, {"L1", "L2"}, {"intercept"});
  // L9 is labelled but not in the fit, so party C has no members
  PartyRoster roster({{"L1", "A"}, {"L2", "B"}, {"L9", "C"}});
  ModelConfig cfg;
  cfg.party_a = "A";
  cfg.party_b = "C";
  const auto s = coefficient_summaries(procrustes_align(c), roster, cfg);
  EXPECT_EQ(s.party_size[2], 0u);
  EXPECT_TRUE(std::isnan(s.party_mean(2, 0)));
  EXPECT_TRUE(std::isnan(s.party_sd(2, 0)));
  EXPECT_TRUE(std::isnan(s.mean_difference(0)));
}

TEST(CoefficientSummaries, UnlabelledLegislatorRaises) {
  auto c = coefficient_chain({col({1, 2})}, {"L1", "L2"}, {"intercept"});
  EXPECT_THROW(coefficient_summaries(procrustes_align(c), PartyRoster(std::map<std::string, std::string>{{"L1", "A"}}), ModelConfig{}), DataError);
}

TEST(PolarizationPair, LargestTwoWithLabelTieBreak) {
  PartyRoster roster({{"a", "Z"}, {"b", "Z"}, {"c", "Y"}, {"d", "X"}, {"e", "W"}});
  ModelConfig cfg;
  EXPECT_EQ(polarization_pair(roster, {"a", "b", "c", "d", "e"}, cfg), (std::pair<std::string, std::string>{"Z", "W"}));
  cfg.party_a = "Y";
  cfg.party_b = "X";
  EXPECT_EQ(polarization_pair(roster, {"a", "b", "c", "d", "e"}, cfg), (std::pair<std::string, std::string>{"Y", "X"}));
  EXPECT_THROW(polarization_pair(PartyRoster(std::map<std::string, std::string>{{"a", "Z"}}), {"a"}, ModelConfig{}), ConfigError);
}

TEST(OrderedExport, AscendingWithIdTieBreak) {
  auto c = coefficient_chain({col({5, 1, 5, -2})}, {"L4", "L3", "L2", "L1"}, {"intercept"});
  PartyRoster roster({{"L1", "A"}, {"L2", "A"}, {"L3", "B"}, {"L4", "B"}});
  const auto s = coefficient_summaries(procrustes_align(c), roster, ModelConfig{});
  const auto rows = ordered_coefficient_export(s, "intercept");
  std::vector<std::string> order;
  for (const auto& r : rows) order.push_back(r.legislator_id);
  EXPECT_EQ(order, (std::vector<std::string>{"L1", "L3", "L2", "L4"}));
  EXPECT_EQ(rows[0].party, "A");
  EXPECT_DOUBLE_EQ(rows[0].mean, -2.0);
  EXPECT_THROW(ordered_coefficient_export(s, "topic_9"), ConfigError);
}
