// Acceptance run: one PASS/FAIL line per criterion. Tolerances and time
// budgets are fixed here and not configurable.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rnp/analysis.hpp"
#include "rnp/arbitrage.hpp"
#include "rnp/estimate.hpp"

using namespace rnp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

VectorXd uniform_vec(std::mt19937_64& rng, Eigen::Index m, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    v[i] = u(rng);
  }
  return v;
}

VectorXd indicator_le(const VectorXd& g, double x) {
  return (g.array() <= x).cast<double>().matrix();
}

/// Smallest value of g whose cumulative mass under pi reaches eps.
double quantile(const VectorXd& pi, const VectorXd& g, double eps) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    order[static_cast<std::size_t>(i)] = i;
  }
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return g[a] < g[b]; });
  double acc = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    acc += pi[order[k]];
    const bool tie = k + 1 < order.size() && g[order[k + 1]] == g[order[k]];
    if (!tie && acc >= eps - 1e-9) {
      return g[order[k]];
    }
  }
  return g.maxCoeff();
}

// 1. The two-outcome example.
Outcome golden() {
  const auto t0 = Clock::now();
  const auto set = fixtures::two_by_two_set();
  const auto b = expectation_bounds(set, Eigen::Vector2d(1, 0));
  const bool no_arb = !has_arbitrage(check_arbitrage(set));
  const double secs = seconds_since(t0);
  const double err = std::max(std::abs(b.lower - 1.0 / 3.0), std::abs(b.upper - 0.5));
  return {err <= 1e-6 && no_arb && secs < 1.0,
          "bounds [" + fmt("%.9f", b.lower) + ", " + fmt("%.9f", b.upper) + "], max err " + fmt("%.1e", err) +
              (no_arb ? ", NoArbitrage" : ", ARBITRAGE") + ", " + fmt("%.3f s", secs)};
}

// 2. Expectation, CDF and ratio bounds against a simplex grid at 1e-3.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const double step = 1e-3, tol = 2e-3, tol_exact = 1e-6;
  double worst = 0.0, worst_exact = 0.0;
  int compared = 0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index m = 2 + k % 3;
    auto rm = oracle::random_market(rng, m, 3, 0.3);
    const RiskNeutralSet set(rm.market);
    const MatrixXd G = set.constraint_matrix();
    const VectorXd h = set.constraint_rhs();
    const VectorXd g = uniform_vec(rng, m, -1, 1);

    const auto verts = oracle::vertices(G, h);
    const auto track = [&](double lo, double hi, oracle::Range grid, oracle::Range exact) {
      worst = std::max({worst, std::abs(lo - grid.lo), std::abs(hi - grid.hi)});
      worst_exact = std::max({worst_exact, std::abs(lo - exact.lo), std::abs(hi - exact.hi)});
    };

    const auto e = expectation_bounds(set, g);
    track(e.lower, e.upper, oracle::grid_range(G, h, g, step), oracle::vertex_range(verts, g));

    std::vector<double> xs{g.minCoeff() + 1e-3, 0.5 * (g.minCoeff() + g.maxCoeff())};
    const auto c = cdf_bounds(set, g, xs);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const VectorXd ind = indicator_le(g, xs[j]);
      track(c.f_min[j], c.f_max[j], oracle::grid_range(G, h, ind, step), oracle::vertex_range(verts, ind));
    }

    // Weighted mean of g: sum g d pi / sum d pi.
    const VectorXd d = uniform_vec(rng, m, 0.5, 1.0);
    const VectorXd f = g.cwiseProduct(d);
    const auto r = ratio_bounds(set, f, d);
    track(r.lower, r.upper, oracle::grid_ratio_range(G, h, f, d, step), oracle::vertex_ratio_range(verts, f, d));
    compared += 1 + static_cast<int>(xs.size()) + 1;
  }
  const double secs = seconds_since(t0);
  return {worst <= tol && worst_exact <= tol_exact && secs < 120.0,
          std::to_string(compared) + " bound pairs on 50 markets, max |diff| vs grid " + fmt("%.2e", worst) +
              " (tol 2e-3), vs vertices " + fmt("%.1e", worst_exact) + " (tol 1e-6), " + fmt("%.1f s", secs)};
}

// 3. Arbitrage certificates re-verified by plain arithmetic.
Outcome certificate_soundness() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int misclassified = 0, bad_certificates = 0, arbitrage_cases = 0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index m = 3 + k % 3;
    auto rm = oracle::random_market(rng, m, 3, 0.3);
    RiskNeutralSet set(rm.market);
    if (k % 2 == 1) {
      // Replicable payoff P w priced below its lowest value over Pi.
      const VectorXd w = uniform_vec(rng, static_cast<Eigen::Index>(rm.market.num_investments()), 0, 1);
      const VectorXd a = rm.market.payoff_matrix() * w;
      const auto verts = oracle::vertices(set.constraint_matrix(), set.constraint_rhs());
      const double lo = oracle::vertex_range(verts, a).lo;
      const double delta = std::pow(10.0, -4.0 + 3.0 * u(rng));
      set = set.add_constraint(a, lo - delta, "cheap");
    }
    const MatrixXd G = set.constraint_matrix();
    const VectorXd h = set.constraint_rhs();
    const bool empty = oracle::vertices(G, h).empty();
    const auto res = check_arbitrage(set);
    misclassified += has_arbitrage(res) != empty ? 1 : 0;
    if (const auto* arb = std::get_if<Arbitrage>(&res)) {
      ++arbitrage_cases;
      const VectorXd& w = arb->certificate.weights;
      double worst = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < G.cols(); ++i) {
        double payoff = 0.0;
        for (Eigen::Index j = 0; j < G.rows(); ++j) {
          payoff += G(j, i) * w[j];
        }
        worst = std::min(worst, payoff);
      }
      double cost = 0.0;
      for (Eigen::Index j = 0; j < h.size(); ++j) {
        cost += h[j] * w[j];
      }
      const double ret = worst - cost;
      const bool ok = w.size() == G.rows() && w.minCoeff() >= 0.0 &&
                      arb->certificate.guaranteed_return > set.tolerances().arb &&
                      ret >= arb->certificate.guaranteed_return - 1e-9 * (1.0 + w.sum());
      bad_certificates += ok ? 0 : 1;
    } else {
      const VectorXd& pi = std::get<NoArbitrage>(res).pi.probs();
      bool ok = pi.minCoeff() >= 0.0 && std::abs(pi.sum() - 1.0) <= 1e-9;
      for (Eigen::Index j = 0; j < G.rows(); ++j) {
        const double scale = 1.0 + std::abs(h[j]) + G.row(j).cwiseAbs().maxCoeff();
        ok = ok && G.row(j).dot(pi) <= h[j] + set.tolerances().feas * scale;
      }
      bad_certificates += ok ? 0 : 1;
    }
  }
  return {misclassified == 0 && bad_certificates == 0,
          std::to_string(arbitrage_cases) + " arbitrage / " + std::to_string(50 - arbitrage_cases) +
              " feasible, misclassified " + std::to_string(misclassified) + ", failed re-verification " +
              std::to_string(bad_certificates)};
}

// 4. CDF envelope shape, VaR sandwich, CVaR above the VaR lower bound.
Outcome cdf_var_structure() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> n01;
  const double tol = 1e-6;
  int failures = 0, checks = 0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index m = 12;
    auto rm = oracle::random_market(rng, m, 4, 0.3);
    const RiskNeutralSet set(rm.market);
    const VectorXd g = uniform_vec(rng, m, -1, 1);
    const auto xs = default_points(g);
    const auto c = cdf_bounds(set, g, xs);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      ++checks;
      bool ok = c.f_min[j] <= c.f_max[j] + tol;
      if (j > 0) {
        ok = ok && c.f_min[j] >= c.f_min[j - 1] - tol && c.f_max[j] >= c.f_max[j - 1] - tol;
      }
      failures += ok ? 0 : 1;
    }
    // Members of Pi: LP solutions for random objectives mixed with pi0.
    std::vector<VectorXd> members{rm.pi0};
    for (int s = 0; s < 10; ++s) {
      VectorXd obj(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        obj[i] = n01(rng);
      }
      const auto r = solve_linear(set, {obj, Sense::Minimize, {}});
      members.push_back(r.pi->probs());
      members.push_back(0.5 * (r.pi->probs() + rm.pi0));
    }
    for (double eps : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const auto v = var_bounds(set, g, eps);
      const double cv = cvar_upper_bound(set, g, eps);
      ++checks;
      bool ok = v.lower <= v.upper + tol && cv >= v.lower - tol;
      for (const auto& pi : members) {
        const double q = quantile(pi, g, eps);
        ok = ok && q >= v.lower - tol && q <= v.upper + tol;
      }
      failures += ok ? 0 : 1;
    }
  }
  return {failures == 0, std::to_string(checks) + " checks on 20 markets, " + std::to_string(failures) + " failures"};
}

// 5. Every held-out option's fair value lies inside its bounds.
Outcome holdout_consistency() {
  int total = 0, outside = 0;
  double worst = 0.0;
  for (double sigma : {0.08, 0.12, 0.2}) {
    const PriceGrid grid = PriceGrid::uniform(50, 150, 0.5);
    const VectorXd pi0 = fixtures::lognormal_masses(grid, std::log(100.0), sigma);
    std::vector<double> strikes;
    for (double k = 70; k <= 130; k += 2.5) {
      strikes.push_back(k);
    }
    auto quotes = fixtures::option_chain(grid, pi0, strikes, 0.0, 0.05);
    // Symmetric spreads proportional to value.
    for (auto& q : quotes) {
      if (q.kind != QuoteKind::Underlying) {
        const double mid = 0.5 * (*q.bid + *q.ask);
        const double hs = 0.02 + 0.02 * mid;
        q.bid = std::max(mid - hs, 0.0);
        q.ask = mid + hs;
      }
    }
    const auto rows = holdout_validate(quotes, {}, grid);
    const Eigen::ArrayXd p = grid.vector().array();
    for (const auto& r : rows) {
      ++total;
      const VectorXd payoff = r.kind == QuoteKind::Call ? VectorXd((p - *r.strike).max(0.0).matrix())
                                                        : VectorXd((*r.strike - p).max(0.0).matrix());
      const double fair = payoff.dot(pi0);
      const double miss = std::max({r.lower - fair, fair - r.upper, 0.0});
      worst = std::max(worst, miss);
      outside += (!r.feasible || miss > 1e-6) ? 1 : 0;
    }
  }
  return {outside == 0 && total >= 100, std::to_string(total) + " hold-outs, " + std::to_string(outside) +
                                            " fair values outside bounds (worst miss " + fmt("%.1e", worst) + ")"};
}

// 6. KL projection fixed points, maxent vs uniform reference, planted log-normal.
Outcome estimation() {
  std::mt19937_64 rng(6);
  double worst_fixed = 0.0, worst_maxent = 0.0;
  for (int k = 0; k < 5; ++k) {
    auto rm = oracle::random_market(rng, 50, 8, 0.2);
    const RiskNeutralSet set(rm.market);
    const Distribution eta(rm.pi0);
    worst_fixed = std::max(worst_fixed, kl_divergence(kl_project(set, eta).probs(), eta.probs()));
    const auto a = max_entropy(set);
    const auto b = kl_project(set, Distribution::uniform(50));
    worst_maxent = std::max(worst_maxent, (a.probs() - b.probs()).cwiseAbs().maxCoeff());
  }

  const PriceGrid grid = PriceGrid::uniform(1001, 3000, 1);
  const double mu = std::log(2000.0), sigma = 0.1;
  const VectorXd pi0 = fixtures::lognormal_masses(grid, mu, sigma);
  std::vector<double> strikes;
  for (double k = 1600; k <= 2500; k += 25) {
    strikes.push_back(k);
  }
  const RiskNeutralSet set(fixtures::market_from_quotes(grid, fixtures::option_chain(grid, pi0, strikes, 0.0)));
  const auto t0 = Clock::now();
  const auto trace = closest_lognormal(set, default_starts(set));
  const double secs = seconds_since(t0);
  const bool fitted = !trace.iterations.empty();
  const double dmu = fitted ? std::abs(trace.last().fit.mu - mu) : INFINITY;
  const double dsigma = fitted ? std::abs(trace.last().fit.sigma - sigma) : INFINITY;
  return {worst_fixed < 1e-8 && worst_maxent <= 1e-6 && dmu <= 1e-3 && dsigma <= 1e-3 && secs < 30.0,
          "fixed-point KL " + fmt("%.1e", worst_fixed) + ", maxent diff " + fmt("%.1e", worst_maxent) +
              ", m=2000 fit |dmu| " + fmt("%.1e", dmu) + " |dsigma| " + fmt("%.1e", dsigma) + " in " +
              std::to_string(fitted ? trace.iterations.size() : 0) + " iterations, " + fmt("%.1f s", secs)};
}

// 7. Dual prices: sign, complementary slackness, global bound, derivatives.
Outcome sensitivities() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  double min_lambda = INFINITY, worst_cs = 0.0, worst_gap = 0.0, worst_fd = 0.0;
  int inequality_failures = 0;
  for (int k = 0; k < 20; ++k) {
    auto rm = oracle::random_market(rng, 15, 5, 0.3);
    const Market& base = rm.market;
    const bool entropy = k % 2 == 1;
    const VectorXd obj = uniform_vec(rng, 15, -1, 1);
    const auto report = [&](const Market& mk) {
      const RiskNeutralSet s(mk);
      return entropy ? sensitivity_report(s, EntropyProgramOverPi{})
                     : sensitivity_report(s, LinearProgramOverPi{obj, Sense::Minimize, {}});
    };
    const auto with_costs = [&](const VectorXd& c) {
      return Market(base.grid(), base.instruments(), std::vector<double>(c.data(), c.data() + c.size()));
    };
    const RiskNeutralSet set(base);
    const auto rep = report(base);
    min_lambda = std::min(min_lambda, rep.lambda.minCoeff());
    const Distribution pi = entropy ? max_entropy(set) : *solve_linear(set, {obj, Sense::Minimize, {}}).pi;
    const VectorXd slack = set.constraint_rhs() - set.constraint_matrix() * pi.probs();
    worst_cs = std::max(worst_cs, rep.lambda.cwiseProduct(slack.head(rep.lambda.size())).cwiseAbs().maxCoeff());

    const VectorXd c0 = base.cost_vector();
    for (int t = 0; t < 100; ++t) {
      VectorXd dc(c0.size());
      for (Eigen::Index j = 0; j < dc.size(); ++j) {
        dc[j] = 0.05 * n01(rng);
      }
      double value = INFINITY;
      try {
        value = report(with_costs(c0 + dc)).objective_value;
      } catch (const EmptySetError&) {
      }
      const double gap = rep.objective_value - rep.lambda.dot(dc) - value;
      worst_gap = std::max(worst_gap, gap);
      inequality_failures += gap > 1e-7 ? 1 : 0;
    }
    if (entropy) {
      for (Eigen::Index j = 0; j < c0.size(); ++j) {
        const double h = 1e-5 * (1.0 + std::abs(c0[j]));
        VectorXd e = VectorXd::Zero(c0.size());
        e[j] = h;
        const double fd =
            (report(with_costs(c0 + e)).objective_value - report(with_costs(c0 - e)).objective_value) / (2 * h);
        worst_fd = std::max(worst_fd, std::abs(fd + rep.lambda[j]));
      }
    }
  }
  return {min_lambda >= -1e-9 && worst_cs < 1e-6 && inequality_failures == 0 && worst_fd <= 1e-3,
          "min lambda " + fmt("%.1e", min_lambda) + ", CS residual " + fmt("%.1e", worst_cs) +
              ", global inequality failures " + std::to_string(inequality_failures) + "/2000 (worst " +
              fmt("%.1e", worst_gap) + "), finite-difference err " + fmt("%.1e", worst_fd)};
}

// 8. Desk-sized market.
Outcome scale() {
  const PriceGrid grid = PriceGrid::uniform(1500.5, 4000, 0.5);
  const VectorXd pi0 = fixtures::lognormal_masses(grid, std::log(2750.0), 0.05);
  std::vector<double> strikes;
  for (double k = 2260; k < 3250; k += 10) {
    strikes.push_back(k);
  }
  auto quotes = fixtures::option_chain(grid, pi0, strikes, 0.0, 0.25);
  for (auto& q : quotes) {
    if (q.kind != QuoteKind::Underlying) {
      const double hs = 0.1 + 0.01 * *q.ask;
      q.ask = *q.ask + hs;
      q.bid = *q.bid > hs ? std::optional<double>(*q.bid - hs) : std::nullopt;
    }
  }
  const RiskNeutralSet set(fixtures::market_from_quotes(grid, quotes));
  const VectorXd p = grid.vector();
  double lp = 0.0;
  for (auto sense : {Sense::Minimize, Sense::Maximize}) {
    const auto t0 = Clock::now();
    const auto r = solve_linear(set, {p, sense, {}});
    lp = std::max(lp, seconds_since(t0));
    if (!r.optimal()) {
      return {false, "expectation LP status " + to_string(r.status)};
    }
  }
  const auto t1 = Clock::now();
  const auto c = cdf_bounds(set, p, default_points(p, 200));
  const double sweep = seconds_since(t1);
  return {lp < 10.0 && sweep < 300.0 && c.xs.size() == 200,
          "m=" + std::to_string(grid.size()) + " n=" + std::to_string(set.market().num_investments()) +
              ", slowest expectation LP " + fmt("%.2f s", lp) + ", 200-point CDF sweep " + fmt("%.1f s", sweep)};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "golden-example", golden},
      {2, "oracle-equivalence", oracle_equivalence},
      {3, "certificate-soundness", certificate_soundness},
      {4, "cdf-var-structure", cdf_var_structure},
      {5, "holdout-consistency", holdout_consistency},
      {6, "estimation", estimation},
      {7, "sensitivities", sensitivities},
      {8, "scale", scale},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("[WAIVED] 9 conditional-reproduction: the published SPX and Bitcoin quote files are not "
              "available, so the market-specific numbers cannot be checked\n");
  std::printf("%d of 8 checked criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
