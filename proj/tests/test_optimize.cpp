#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rnp/optimize.hpp"

using namespace rnp;
using Eigen::VectorXd;

namespace {

SolveResult lin(const RiskNeutralSet& set, const VectorXd& obj, Sense sense) {
  return solve_linear(set, LinearProgramOverPi{obj, sense, {}});
}

/// Stationarity residual of the linear program  min s*obj^T pi  over Pi.
double stationarity(const RiskNeutralSet& set, const VectorXd& obj, double sign, const SolveResult& r) {
  VectorXd lam(static_cast<Eigen::Index>(set.num_rows()));
  lam << r.duals_on_costs, r.duals_on_extra_rows;
  const VectorXd resid = sign * obj + set.constraint_matrix().transpose() * lam -
                         r.dual_normalization * VectorXd::Ones(obj.size()) - r.reduced_costs;
  return resid.cwiseAbs().maxCoeff();
}

} // namespace

TEST(SolveLinear, PaperExample) {
  const auto set = fixtures::two_by_two_set();
  const Eigen::Vector2d e1(1, 0);
  const auto lo = lin(set, e1, Sense::Minimize);
  const auto hi = lin(set, e1, Sense::Maximize);
  ASSERT_TRUE(lo.optimal());
  ASSERT_TRUE(hi.optimal());
  EXPECT_NEAR(lo.value, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(hi.value, 0.5, 1e-9);
  EXPECT_TRUE(set.contains(lo.pi->probs()));
  EXPECT_TRUE(set.contains(hi.pi->probs()));
  // At the minimum only the second cost row binds; at the maximum only the first.
  EXPECT_NEAR(lo.duals_on_costs[0], 0.0, 1e-8);
  EXPECT_GT(lo.duals_on_costs[1], 0.1);
  EXPECT_GT(hi.duals_on_costs[0], 0.1);
  EXPECT_NEAR(hi.duals_on_costs[1], 0.0, 1e-8);
  EXPECT_LT(stationarity(set, e1, 1.0, lo), 1e-7);
  EXPECT_LT(stationarity(set, e1, -1.0, hi), 1e-7);
}

TEST(SolveLinear, EmptyMarketPutsMassOnCheapestOutcome) {
  RiskNeutralSet set(Market(PriceGrid({3, 5, 9}), {}, {}));
  const auto r = lin(set, Eigen::Vector3d(3, 5, 9), Sense::Minimize);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, 3.0, 1e-8);
  EXPECT_NEAR((*r.pi)[0], 1.0, 1e-8);
}

TEST(SolveLinear, InfeasibleSetReported) {
  const auto set = fixtures::two_by_two_set().add_constraint(Eigen::Vector2d(1, 0), 0.2);
  const auto r = lin(set, Eigen::Vector2d(1, 0), Sense::Minimize);
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
  EXPECT_FALSE(r.pi.has_value());
}

TEST(SolveLinear, BadObjectiveLength) {
  EXPECT_THROW(lin(fixtures::two_by_two_set(), VectorXd::Ones(3), Sense::Minimize),
               InvalidArgumentError);
}

TEST(SolveLinear, SinglePointSet) {
  const auto set = fixtures::two_by_two_set().add_equality(Eigen::Vector2d(1, 0), 0.4, "pin");
  for (auto sense : {Sense::Minimize, Sense::Maximize}) {
    for (int k = 0; k < 5; ++k) {
      const VectorXd obj = VectorXd::Random(2);
      const auto r = lin(set, obj, sense);
      ASSERT_TRUE(r.optimal());
      EXPECT_NEAR((*r.pi)[0], 0.4, 1e-7);
    }
  }
}

TEST(SolveLinear, MatchesGridOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto rm = oracle::random_market(rng, 3, 2, 0.4, 1);
    RiskNeutralSet set(rm.market);
    const VectorXd obj = VectorXd::Random(3);
    const auto range = oracle::grid_range(set.constraint_matrix(), set.constraint_rhs(), obj, 1e-3);
    const auto verts = oracle::vertices(set.constraint_matrix(), set.constraint_rhs());
    const auto exact = oracle::vertex_range(verts, obj);
    const auto lo = lin(set, obj, Sense::Minimize);
    const auto hi = lin(set, obj, Sense::Maximize);
    ASSERT_TRUE(lo.optimal() && hi.optimal());
    EXPECT_NEAR(lo.value, range.lo, 2e-3);
    EXPECT_NEAR(hi.value, range.hi, 2e-3);
    EXPECT_NEAR(lo.value, exact.lo, 1e-7);
    EXPECT_NEAR(hi.value, exact.hi, 1e-7);
  }
}

TEST(SolveLinear, DualsSatisfyOptimalityConditions) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto rm = oracle::random_market(rng, 6, 4, 0.3);
    RiskNeutralSet set(rm.market);
    const VectorXd obj = VectorXd::Random(6);
    const auto r = lin(set, obj, Sense::Minimize);
    ASSERT_TRUE(r.optimal());
    EXPECT_TRUE(set.contains(r.pi->probs()));
    EXPECT_GE(r.duals_on_costs.minCoeff(), -set.tolerances().feas);
    const VectorXd slack = set.constraint_rhs() - set.constraint_matrix() * r.pi->probs();
    for (Eigen::Index j = 0; j < slack.size(); ++j) {
      EXPECT_LE(r.duals_on_costs[j] * slack[j], set.tolerances().cs);
    }
    EXPECT_LT(stationarity(set, obj, 1.0, r), set.tolerances().opt);
    // Weak duality against a known member.
    EXPECT_LE(r.value, obj.dot(rm.pi0) + set.tolerances().opt);
  }
}

TEST(SolveLinear, Deterministic) {
  std::mt19937_64 rng(23);
  auto rm = oracle::random_market(rng, 8, 5, 0.2);
  RiskNeutralSet set(rm.market);
  const VectorXd obj = VectorXd::Random(8);
  const auto a = lin(set, obj, Sense::Maximize);
  const auto b = lin(set, obj, Sense::Maximize);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.pi->probs(), b.pi->probs());
}

TEST(SolveEntropy, UniformWithoutInstruments) {
  RiskNeutralSet set(Market(PriceGrid({1, 2, 3, 4, 5}), {}, {}));
  const auto r = solve_entropy(set, {});
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.pi->entropy(), std::log(5.0), 1e-10);
  EXPECT_NEAR(r.value, -std::log(5.0), 1e-10);
  EXPECT_LT((r.pi->probs() - VectorXd::Constant(5, 0.2)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SolveEntropy, PaperExampleMaxEntropy) {
  const auto r = solve_entropy(fixtures::two_by_two_set(), {});
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR((*r.pi)[0], 0.5, 1e-7);
}

TEST(SolveEntropy, MemberReferenceIsItsOwnProjection) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    auto rm = oracle::random_market(rng, 10, 4, 0.2);
    RiskNeutralSet set(rm.market);
    const auto r = solve_entropy(set, {Distribution(rm.pi0)});
    ASSERT_TRUE(r.optimal());
    EXPECT_LT(r.value, 1e-9);
    EXPECT_LT((r.pi->probs() - rm.pi0).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(SolveEntropy, InvalidReference) {
  const auto set = fixtures::two_by_two_set();
  EXPECT_THROW(solve_entropy(set, {Distribution(Eigen::Vector2d(1, 0))}), InvalidReferenceError);
  EXPECT_THROW(solve_entropy(set, {Distribution::uniform(3)}), InvalidReferenceError);
}

TEST(SolveEntropy, MatchesGridOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto rm = oracle::random_market(rng, 3, 2, 0.3, 1);
    RiskNeutralSet set(rm.market);
    const VectorXd eta = oracle::random_distribution(rng, 3, 0.05);
    const auto r = solve_entropy(set, {Distribution(eta)});
    ASSERT_TRUE(r.optimal());
    const double brute = oracle::grid_min_kl(set.constraint_matrix(), set.constraint_rhs(), eta, 1e-3);
    EXPECT_LE(r.value, brute + 1e-9);
    EXPECT_NEAR(r.value, brute, 5e-3);
  }
}

TEST(SolveEntropy, PermutationInvariant) {
  std::mt19937_64 rng(37);
  auto rm = oracle::random_market(rng, 7, 4, 0.2);
  RiskNeutralSet set(rm.market);
  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // Same problem with outcomes relabelled, encoded through custom payoffs.
  const auto& P = rm.market.payoff_matrix();
  std::vector<Instrument> instr;
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    std::vector<double> col(7);
    for (int i = 0; i < 7; ++i) {
      col[static_cast<std::size_t>(i)] = P(perm[static_cast<std::size_t>(i)], j);
    }
    instr.push_back({InstrumentKind::CustomPayoff, {}, col, {}});
  }
  RiskNeutralSet permuted(Market(rm.market.grid(), instr, rm.market.costs()));
  const auto a = solve_entropy(set, {});
  const auto b = solve_entropy(permuted, {});
  ASSERT_TRUE(a.optimal() && b.optimal());
  EXPECT_NEAR(a.value, b.value, 10 * set.tolerances().opt);
}

TEST(AuxiliaryBlock, DimensionChecks) {
  const auto set = fixtures::two_by_two_set();
  AuxiliaryBlock ax;
  ax.count = 1;
  ax.objective = VectorXd::Ones(1);
  ax.cost_rows = Eigen::MatrixXd::Ones(3, 1);
  ax.normalization = VectorXd::Zero(1);
  EXPECT_THROW(solve_linear(set, {VectorXd::Zero(2), Sense::Minimize, ax}), InvalidArgumentError);
}
