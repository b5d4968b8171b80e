#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rnp/arbitrage.hpp"
#include "rnp/error.hpp"
#include "rnp/market.hpp"
#include "rnp/optimize.hpp"
#include "rnp/polytope.hpp"

namespace rnp {

/// g(p_i) on the grid.
using PriceFunction = Eigen::VectorXd;

inline PriceFunction price_function(const PriceGrid& grid, const std::function<double(double)>& g) {
  PriceFunction v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = g(grid[i]);
  }
  return v;
}

/// 1 where lo <= p <= hi.
inline PriceFunction indicator(const PriceGrid& grid, double lo, double hi) {
  return price_function(grid, [=](double p) { return p >= lo && p <= hi ? 1.0 : 0.0; });
}

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
  Distribution argmin_pi;
  Distribution argmax_pi;
};

struct CdfBounds {
  std::vector<double> xs;
  std::vector<double> f_min;
  std::vector<double> f_max;
};

struct DualEntry {
  std::string label;
  double cost = 0.0;
  double lambda = 0.0;
};

/// Multipliers of P^T pi <= c at the optimum of a minimization over Pi.
/// objective_value is that minimum L*(c), so grad L*(c) = -lambda.
struct DualReport {
  Eigen::VectorXd lambda;
  Eigen::VectorXd extra_lambda;
  double objective_value = 0.0;
  std::vector<DualEntry> per_investment;
};

struct HoldoutRow {
  std::string label;
  QuoteKind kind = QuoteKind::Call;
  std::optional<double> strike;
  std::optional<double> true_bid;
  std::optional<double> true_ask;
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = true;
  bool violation = false;
  std::string message;
};

namespace detail {

inline void check_function(const RiskNeutralSet& set, const PriceFunction& g, const char* what) {
  if (static_cast<std::size_t>(g.size()) != set.num_outcomes()) {
    throw InvalidArgumentError(std::string(what) + " must have one value per outcome");
  }
  if (!g.allFinite()) {
    throw InvalidArgumentError(std::string(what) + " must be finite");
  }
}

inline void require_optimal(const SolveResult& r, const std::string& what) {
  if (r.status == SolveStatus::Infeasible) {
    throw EmptySetError("the risk-neutral set is empty (" + what + ")");
  }
  if (!r.optimal()) {
    throw NumericalFailureError(what + " did not solve", r.solver_status);
  }
}

inline SolveResult solve_or_throw(const RiskNeutralSet& set, const Eigen::VectorXd& obj, Sense sense,
                                  const std::string& what, const SolverOptions& opts) {
  SolveResult r = solve_linear(set, LinearProgramOverPi{obj, sense, {}}, opts);
  require_optimal(r, what);
  return r;
}

inline std::vector<double> distinct_sorted(const PriceFunction& g) {
  std::vector<double> v(g.data(), g.data() + g.size());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Makes a bound curve monotone and clamps it to [0, 1]; the true curves are
/// monotone, so this only removes solver noise.
inline void clean_curve(std::vector<double>& f, bool increasing) {
  for (double& v : f) {
    v = std::clamp(v, 0.0, 1.0);
  }
  if (increasing) {
    for (std::size_t k = 1; k < f.size(); ++k) {
      f[k] = std::max(f[k], f[k - 1]);
    }
  } else {
    for (std::size_t k = f.size(); k-- > 1;) {
      f[k - 1] = std::max(f[k - 1], f[k]);
    }
  }
}

/// Bounds of Prob(event) where the event is {i : g_i <= x} (below) or
/// {i : g_i >= x} (above), for each x, sharing work between thresholds that
/// select the same outcomes.
inline CdfBounds probability_curve(const RiskNeutralSet& set, const PriceFunction& g,
                                   const std::vector<double>& xs, bool below,
                                   const SolverOptions& opts) {
  check_function(set, g, "price function");
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  CdfBounds out;
  out.xs = xs;
  out.f_min.resize(xs.size());
  out.f_max.resize(xs.size());
  std::map<Eigen::Index, std::pair<double, double>> cache;  // keyed by event size
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    if (!std::isfinite(x)) {
      throw InvalidArgumentError("evaluation points must be finite");
    }
    Eigen::VectorXd ind(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      ind[i] = (below ? g[i] <= x : g[i] >= x) ? 1.0 : 0.0;
    }
    const auto count = static_cast<Eigen::Index>(ind.sum());
    if (count == 0 || count == m) {
      out.f_min[k] = out.f_max[k] = count == 0 ? 0.0 : 1.0;
      continue;
    }
    // For a fixed g the event is determined by how many outcomes it holds.
    auto it = cache.find(count);
    if (it == cache.end()) {
      const auto lo = solve_or_throw(set, ind, Sense::Minimize, "probability lower bound", opts);
      const auto hi = solve_or_throw(set, ind, Sense::Maximize, "probability upper bound", opts);
      it = cache.emplace(count, std::make_pair(lo.value, hi.value)).first;
    }
    out.f_min[k] = it->second.first;
    out.f_max[k] = it->second.second;
  }
  // xs need not be sorted; clean along sorted order.
  std::vector<std::size_t> order(xs.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    order[k] = k;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> lo(xs.size()), hi(xs.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    lo[k] = out.f_min[order[k]];
    hi[k] = out.f_max[order[k]];
  }
  clean_curve(lo, below);
  clean_curve(hi, below);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.f_min[order[k]] = lo[k];
    out.f_max[order[k]] = std::max(hi[k], lo[k]);
  }
  return out;
}

} // namespace detail

/// min and max of E g(p) over Pi.
inline BoundPair expectation_bounds(const RiskNeutralSet& set, const PriceFunction& g,
                                    const SolverOptions& opts = {}) {
  detail::check_function(set, g, "price function");
  const auto lo = detail::solve_or_throw(set, g, Sense::Minimize, "expectation lower bound", opts);
  const auto hi = detail::solve_or_throw(set, g, Sense::Maximize, "expectation upper bound", opts);
  return BoundPair{lo.value, std::max(hi.value, lo.value), *lo.pi, *hi.pi};
}

/// Bounds on the cost of a new investment paying `payoff_new`.
inline BoundPair price_bounds(const RiskNeutralSet& set, const PriceFunction& payoff_new,
                              const SolverOptions& opts = {}) {
  return expectation_bounds(set, payoff_new, opts);
}

/// Bounds on E f(p) / E g(p) over Pi via the Charnes-Cooper substitution
/// y = t pi, t = 1 / g^T pi:
///   min f^T y  s.t.  G y <= t h,  1^T y = t,  g^T y = 1,  y, t >= 0.
inline BoundPair ratio_bounds(const RiskNeutralSet& set, const PriceFunction& f, const PriceFunction& g,
                              double delta_denom = 1e-9, const SolverOptions& opts = {}) {
  detail::check_function(set, f, "numerator");
  detail::check_function(set, g, "denominator");
  const auto den = detail::solve_or_throw(set, g, Sense::Minimize, "denominator lower bound", opts);
  if (den.value < delta_denom) {
    throw DegenerateDenominatorError(den.value, delta_denom);
  }
  AuxiliaryBlock ax;
  ax.count = 1;
  ax.objective = Eigen::VectorXd::Zero(1);
  ax.cost_rows = -set.constraint_rhs();
  ax.rhs_scale = 0.0;
  ax.normalization = -Eigen::VectorXd::Ones(1);
  ax.normalization_rhs = 0.0;
  ax.rows_pi = g.transpose();
  ax.rows_aux = Eigen::MatrixXd::Zero(1, 1);
  ax.row_lower = Eigen::VectorXd::Ones(1);
  ax.row_upper = Eigen::VectorXd::Ones(1);

  auto solve_side = [&](Sense sense) {
    SolveResult r = solve_linear(set, LinearProgramOverPi{f, sense, ax}, opts);
    detail::require_optimal(r, "ratio bound");
    const Eigen::VectorXd y = r.pi_block.cwiseMax(0.0);
    if (!(y.sum() > 0.0)) {
      throw NumericalFailureError("ratio bound returned a zero scaling", r.solver_status);
    }
    Distribution pi(y / y.sum(), 1e-6);
    const double value = f.dot(pi.probs()) / g.dot(pi.probs());
    return std::make_pair(value, std::move(pi));
  };
  auto lo = solve_side(Sense::Minimize);
  auto hi = solve_side(Sense::Maximize);
  return BoundPair{lo.first, std::max(hi.first, lo.first), std::move(lo.second), std::move(hi.second)};
}

/// Bounds on F(x) = Prob(g(p) <= x) at each x.
inline CdfBounds cdf_bounds(const RiskNeutralSet& set, const PriceFunction& g, const std::vector<double>& xs,
                            const SolverOptions& opts = {}) {
  return detail::probability_curve(set, g, xs, true, opts);
}

/// Bounds on Prob(g(p) >= x) at each x, from their own LPs (not 1 - CDF).
inline CdfBounds ccdf_bounds(const RiskNeutralSet& set, const PriceFunction& g, const std::vector<double>& xs,
                             const SolverOptions& opts = {}) {
  return detail::probability_curve(set, g, xs, false, opts);
}

/// Up to `max_points` evaluation points taken from the distinct values of g,
/// evenly subsampled and always keeping both ends.
inline std::vector<double> default_points(const PriceFunction& g, std::size_t max_points = 500) {
  std::vector<double> v = detail::distinct_sorted(g);
  if (max_points == 0 || v.size() <= max_points) {
    return v;
  }
  std::vector<double> out;
  out.reserve(max_points);
  for (std::size_t k = 0; k < max_points; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(v.size() - 1) /
                       static_cast<double>(max_points - 1);
    out.push_back(v[static_cast<std::size_t>(std::llround(pos))]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Sandwich F_max^{-1}(eps) <= VaR(g; eps) <= F_min^{-1}(eps) with
/// F^{-1}(eps) = min{ v : F(v) >= eps } over the distinct values v of g.
///
/// argmin_pi attains the lower value as its own eps-quantile; argmax_pi the
/// upper one.
inline BoundPair var_bounds(const RiskNeutralSet& set, const PriceFunction& g, double eps,
                            const SolverOptions& opts = {}) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidProbabilityError("eps must lie strictly between 0 and 1");
  }
  detail::check_function(set, g, "price function");
  const std::vector<double> v = detail::distinct_sorted(g);
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  const auto K = v.size();
  const double slack = 1e-9;

  struct Eval {
    double value = 0.0;
    std::optional<Distribution> pi;
  };
  auto evaluate = [&](std::size_t k, Sense sense) {
    Eigen::VectorXd ind(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      ind[i] = g[i] <= v[k] ? 1.0 : 0.0;
    }
    if (k + 1 == K) {
      // Every outcome is in the event.
      Eval e{1.0, {}};
      return e;
    }
    const auto r = detail::solve_or_throw(set, ind, sense, "quantile bound", opts);
    return Eval{r.value, r.pi};
  };

  // Smallest k in [0, hi_limit] with F(v_k) >= eps - slack; F is nondecreasing.
  auto first_reaching = [&](Sense sense, std::size_t hi_limit, std::optional<Distribution>& witness) {
    std::size_t lo = 0;
    std::size_t hi = hi_limit;
    std::optional<Distribution> hi_witness;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      Eval e = evaluate(mid, sense);
      if (e.value >= eps - slack) {
        hi = mid;
        hi_witness = std::move(e.pi);
      } else {
        lo = mid + 1;
      }
    }
    witness = std::move(hi_witness);
    return lo;
  };

  // Upper bound from F_min; the lower bound from F_max can only be smaller.
  std::optional<Distribution> upper_unused;
  const std::size_t k_up = first_reaching(Sense::Minimize, K - 1, upper_unused);
  std::optional<Distribution> lower_witness;
  const std::size_t k_lo = first_reaching(Sense::Maximize, k_up, lower_witness);

  // Witness for the upper value: a member whose CDF at the previous level
  // stays below eps, so its quantile is v[k_up].
  std::optional<Distribution> upper_witness;
  if (k_up > 0) {
    upper_witness = evaluate(k_up - 1, Sense::Minimize).pi;
  }
  auto any_member = [&]() {
    return *detail::solve_or_throw(set, Eigen::VectorXd::Zero(m), Sense::Minimize, "feasibility", opts).pi;
  };
  if (!lower_witness) {
    lower_witness = k_lo + 1 == K ? any_member() : *evaluate(k_lo, Sense::Maximize).pi;
  }
  if (!upper_witness) {
    upper_witness = any_member();
  }
  return BoundPair{v[k_lo], v[k_up], std::move(*lower_witness), std::move(*upper_witness)};
}

/// Upper-tail CVaR of g under pi: min over beta of beta + E (g - beta)_+ / (1 - eps).
inline double cvar(const Distribution& pi, const PriceFunction& g, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidProbabilityError("eps must lie strictly between 0 and 1");
  }
  // The minimizing beta is the eps-quantile of g under pi.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    idx[static_cast<std::size_t>(i)] = i;
  }
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return g[a] < g[b]; });
  double acc = 0.0;
  double beta = g[idx.back()];
  for (Eigen::Index i : idx) {
    acc += pi.probs()[i];
    if (acc >= eps - 1e-12) {
      beta = g[i];
      break;
    }
  }
  double tail = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    tail += pi.probs()[i] * std::max(g[i] - beta, 0.0);
  }
  return beta + tail / (1.0 - eps);
}

struct CvarBound {
  double value = 0.0;
  /// The member of Pi attaining the bound.
  Distribution pi;
};

/// max over Pi of CVaR(g; eps), through the dual form
///   CVaR(pi) = max { g^T q : 0 <= q <= pi / (1 - eps), 1^T q = 1 }.
/// Writing pi = (1 - eps)(q + r) with r >= 0 turns the whole problem into one LP
/// in (q, r).
inline CvarBound cvar_upper_bound_with_witness(const RiskNeutralSet& set, const PriceFunction& g,
                                               double eps, const SolverOptions& opts = {}) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidProbabilityError("eps must lie strictly between 0 and 1");
  }
  detail::check_function(set, g, "price function");
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  AuxiliaryBlock ax;
  ax.count = m;
  ax.objective = Eigen::VectorXd::Zero(m);
  ax.cost_rows = set.constraint_matrix();
  ax.rhs_scale = 1.0 / (1.0 - eps);
  ax.normalization = Eigen::VectorXd::Zero(m);
  ax.normalization_rhs = 1.0;
  ax.rows_pi = Eigen::MatrixXd::Zero(1, m);
  ax.rows_aux = Eigen::MatrixXd::Ones(1, m);
  ax.row_lower = ax.row_upper = Eigen::VectorXd::Constant(1, eps / (1.0 - eps));
  SolveResult r = solve_linear(set, LinearProgramOverPi{g, Sense::Maximize, ax}, opts);
  detail::require_optimal(r, "CVaR upper bound");
  const Eigen::VectorXd pi = ((1.0 - eps) * (r.pi_block + r.aux_values)).cwiseMax(0.0);
  Distribution witness(pi / pi.sum(), 1e-6);
  return CvarBound{std::max(r.value, cvar(witness, g, eps)), std::move(witness)};
}

inline double cvar_upper_bound(const RiskNeutralSet& set, const PriceFunction& g, double eps,
                               const SolverOptions& opts = {}) {
  return cvar_upper_bound_with_witness(set, g, eps, opts).value;
}

/// Dual variables of the cost constraints at the optimum of `objective`.
inline DualReport sensitivity_report(const RiskNeutralSet& set,
                                     const std::variant<LinearProgramOverPi, EntropyProgramOverPi>& objective,
                                     const SolverOptions& opts = {}) {
  SolveResult r;
  double minimized = 0.0;
  if (const auto* lp = std::get_if<LinearProgramOverPi>(&objective)) {
    r = solve_linear(set, *lp, opts);
    detail::require_optimal(r, "sensitivity objective");
    minimized = lp->sense == Sense::Maximize ? -r.value : r.value;
  } else {
    r = solve_entropy(set, std::get<EntropyProgramOverPi>(objective), opts);
    detail::require_optimal(r, "sensitivity objective");
    minimized = r.value;
  }
  if (!r.duals_on_costs.allFinite()) {
    throw NumericalFailureError("dual extraction produced non-finite values", r.solver_status);
  }
  DualReport rep;
  rep.lambda = r.duals_on_costs.cwiseMax(0.0);
  rep.extra_lambda = r.duals_on_extra_rows.cwiseMax(0.0);
  rep.objective_value = minimized;
  const auto& market = set.market();
  for (std::size_t j = 0; j < market.num_investments(); ++j) {
    rep.per_investment.push_back(
        {set.row_label(j), market.costs()[j], rep.lambda[static_cast<Eigen::Index>(j)]});
  }
  std::stable_sort(rep.per_investment.begin(), rep.per_investment.end(),
                   [](const DualEntry& a, const DualEntry& b) { return a.lambda > b.lambda; });
  return rep;
}

/// Holds out each quoted option (both sides at once), bounds its price with
/// the remaining market and compares with the quote. A quote is flagged when
/// its bid net of selling fees exceeds the upper bound, or its ask plus buying
/// fees falls below the lower bound.
inline std::vector<HoldoutRow> holdout_validate(const std::vector<Quote>& quotes, const FeeSchedule& fees,
                                                const PriceGrid& grid, double discount_factor = 1.0,
                                                const Tolerances& tol = {}, const SolverOptions& opts = {}) {
  std::vector<std::vector<Investment>> expanded;
  std::size_t quoted = 0;
  for (const auto& q : quotes) {
    expanded.push_back(quote_to_investments(q, fees));
    quoted += expanded.back().empty() ? 0 : 1;
  }
  if (quoted < 2) {
    throw InvalidArgumentError("hold-out validation needs at least two quoted instruments");
  }
  std::vector<HoldoutRow> rows;
  for (std::size_t h = 0; h < quotes.size(); ++h) {
    const Quote& q = quotes[h];
    if (q.kind != QuoteKind::Call && q.kind != QuoteKind::Put && q.kind != QuoteKind::Binary) {
      continue;
    }
    if (expanded[h].empty()) {
      continue;
    }
    HoldoutRow row;
    row.kind = q.kind;
    row.strike = q.strike;
    row.true_bid = q.bid;
    row.true_ask = q.ask;
    std::ostringstream label;
    label << q.strike.value_or(0.0) << ' ' << to_string(q.kind);
    row.label = label.str();

    std::vector<Investment> rest;
    for (std::size_t k = 0; k < quotes.size(); ++k) {
      if (k != h) {
        rest.insert(rest.end(), expanded[k].begin(), expanded[k].end());
      }
    }
    const RiskNeutralSet set(Market::from_investments(grid, rest, discount_factor), tol);
    Instrument buy = expanded[h].front().instrument;
    if (buy.kind == InstrumentKind::CallWrite) {
      buy.kind = InstrumentKind::CallBuy;
    } else if (buy.kind == InstrumentKind::PutWrite) {
      buy.kind = InstrumentKind::PutBuy;
    } else if (buy.kind == InstrumentKind::BinaryAboveSell) {
      buy.kind = InstrumentKind::BinaryAboveBuy;
    }
    const PriceFunction payoff_new = payoff_column(buy, grid, discount_factor);
    try {
      const BoundPair b = price_bounds(set, payoff_new, opts);
      row.lower = b.lower;
      row.upper = b.upper;
      const double slack = tol.arb;
      if (q.bid) {
        const double net = *q.bid - fees.option_fixed_fee - fees.option_proportional_fee * *q.bid;
        row.violation = row.violation || net > row.upper + slack;
      }
      if (q.ask) {
        const double gross = *q.ask + fees.option_fixed_fee + fees.option_proportional_fee * *q.ask;
        row.violation = row.violation || gross < row.lower - slack;
      }
    } catch (const EmptySetError& e) {
      row.feasible = false;
      row.lower = std::numeric_limits<double>::quiet_NaN();
      row.upper = std::numeric_limits<double>::quiet_NaN();
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace rnp
