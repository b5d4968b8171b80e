#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "rnp/market.hpp"
#include "rnp/polytope.hpp"

namespace fixtures {

/// Two outcomes, two investments with P = [[3/2, 0], [1/2, 3/2]] and c = (1, 1).
inline rnp::Market two_by_two() {
  rnp::PriceGrid grid({1.0, 2.0});
  std::vector<rnp::Instrument> instr{
      {rnp::InstrumentKind::CustomPayoff, std::nullopt, {1.5, 0.5}, "first"},
      {rnp::InstrumentKind::CustomPayoff, std::nullopt, {0.0, 1.5}, "second"},
  };
  return rnp::Market(grid, instr, {1.0, 1.0});
}

inline rnp::RiskNeutralSet two_by_two_set() { return rnp::RiskNeutralSet(two_by_two()); }

/// Log-normal masses on the grid from midpoint cells, computed here
/// independently of the library.
inline Eigen::VectorXd lognormal_masses(const rnp::PriceGrid& grid, double mu, double sigma) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  auto cdf = [&](double x) { return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0))); };
  Eigen::VectorXd p(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double lo = i == 0 ? 0.0 : cdf(0.5 * (grid[k - 1] + grid[k]));
    const double hi = i == m - 1 ? 1.0 : cdf(0.5 * (grid[k] + grid[k + 1]));
    p[i] = std::max(hi - lo, 1e-300);
  }
  return p / p.sum();
}

/// Calls and puts at `strikes` quoted symmetrically around their value under
/// pi0, plus the underlying at its mean.
inline std::vector<rnp::Quote> option_chain(const rnp::PriceGrid& grid, const Eigen::VectorXd& pi0,
                                            const std::vector<double>& strikes, double half_spread,
                                            double underlying_half_spread = 0.0) {
  std::vector<rnp::Quote> out;
  const Eigen::VectorXd p = grid.vector();
  const double mean = p.dot(pi0);
  out.push_back({rnp::QuoteKind::Underlying, std::nullopt, mean - underlying_half_spread,
                 mean + underlying_half_spread});
  for (double k : strikes) {
    const double call = (p.array() - k).max(0.0).matrix().dot(pi0);
    const double put = (k - p.array()).max(0.0).matrix().dot(pi0);
    out.push_back({rnp::QuoteKind::Call, k, std::max(call - half_spread, 0.0), call + half_spread});
    out.push_back({rnp::QuoteKind::Put, k, std::max(put - half_spread, 0.0), put + half_spread});
  }
  return out;
}

inline rnp::Market market_from_quotes(const rnp::PriceGrid& grid, const std::vector<rnp::Quote>& quotes,
                                      const rnp::FeeSchedule& fees = {}) {
  std::vector<rnp::Investment> inv;
  for (const auto& q : quotes) {
    const auto e = rnp::quote_to_investments(q, fees);
    inv.insert(inv.end(), e.begin(), e.end());
  }
  return rnp::Market::from_investments(grid, inv);
}

} // namespace fixtures
