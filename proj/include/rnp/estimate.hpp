#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rnp/analysis.hpp"
#include "rnp/error.hpp"
#include "rnp/market.hpp"
#include "rnp/optimize.hpp"
#include "rnp/polytope.hpp"

namespace rnp {

struct LogNormalFit {
  double mu = 0.0;
  double sigma = 0.0;
  PriceGrid grid;
};

struct AlternationStep {
  Distribution pi;  // projection onto Pi
  LogNormalFit fit; // fit to the previous projection
  Distribution eta; // discretized fit
  double divergence = 0.0;
};

struct AlternationTrace {
  std::vector<AlternationStep> iterations;
  bool converged = false;
  std::string stop_reason;

  const AlternationStep& last() const { return iterations.back(); }
  double final_divergence() const {
    return iterations.empty() ? std::numeric_limits<double>::infinity() : iterations.back().divergence;
  }
};

inline Distribution max_entropy(const RiskNeutralSet& set, const SolverOptions& opts = {}) {
  const auto r = solve_entropy(set, {}, opts);
  detail::require_optimal(r, "maximum entropy");
  return *r.pi;
}

inline Distribution kl_project(const RiskNeutralSet& set, const Distribution& eta,
                               const SolverOptions& opts = {}) {
  const auto r = solve_entropy(set, {eta}, opts);
  detail::require_optimal(r, "KL projection");
  return *r.pi;
}

/// Moments of log p under pi (population variance).
inline LogNormalFit fit_lognormal_moments(const Distribution& pi, const PriceGrid& grid) {
  if (pi.size() != grid.size()) {
    throw InvalidArgumentError("distribution and grid sizes differ");
  }
  if (grid.front() <= 0.0) {
    throw InvalidArgumentError("log-normal fit needs a strictly positive grid");
  }
  const Eigen::ArrayXd logp = grid.vector().array().log();
  const Eigen::ArrayXd w = pi.probs().array();
  const double mu = (w * logp).sum();
  const double var = (w * (logp - mu).square()).sum();
  const double sigma = std::sqrt(std::max(var, 0.0));
  if (!(sigma > 1e-12) || !std::isfinite(mu)) {
    throw DegenerateFitError(mu);
  }
  return {mu, sigma, grid};
}

/// Cell masses of the log-normal on midpoint cells, with the two tails
/// absorbed by the end cells. Entries are floored at 1e-300 so the result is
/// usable as a KL reference.
inline Distribution discretize_lognormal(const LogNormalFit& fit) {
  if (!(fit.sigma > 0.0) || !std::isfinite(fit.mu) || !std::isfinite(fit.sigma)) {
    throw InvalidArgumentError("log-normal fit needs finite mu and sigma > 0");
  }
  const auto& g = fit.grid;
  const std::size_t m = g.size();
  const double s = fit.sigma * std::sqrt(2.0);
  auto z = [&](double x) { return x <= 0.0 ? -std::numeric_limits<double>::infinity() : (std::log(x) - fit.mu) / s; };
  // Mass of (za, zb] in standardized erf units; uses the far tail for accuracy.
  auto mass = [](double za, double zb) {
    if (za >= 0.0) {
      return 0.5 * (std::erfc(za) - std::erfc(zb));
    }
    if (zb <= 0.0) {
      return 0.5 * (std::erfc(-zb) - std::erfc(-za));
    }
    return 1.0 - 0.5 * std::erfc(-za) - 0.5 * std::erfc(zb);
  };
  Eigen::VectorXd p(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double za = i == 0 ? -std::numeric_limits<double>::infinity() : z(0.5 * (g[i - 1] + g[i]));
    const double zb = i + 1 == m ? std::numeric_limits<double>::infinity() : z(0.5 * (g[i] + g[i + 1]));
    p[static_cast<Eigen::Index>(i)] = std::max(mass(za, zb), 1e-300);
  }
  return Distribution(p / p.sum());
}

/// Alternates fit, discretize and KL projection starting from pi0 until the
/// projection is within tol_div of the discretized fit.
inline AlternationTrace closest_lognormal(const RiskNeutralSet& set, const Distribution& pi0,
                                          int max_iters = 50, double tol_div = 1e-6,
                                          const SolverOptions& opts = {}) {
  if (max_iters < 1) {
    throw InvalidArgumentError("max_iters must be at least 1");
  }
  if (!(tol_div >= 0.0)) {
    throw InvalidArgumentError("tol_div must be nonnegative");
  }
  if (!set.contains(pi0.probs())) {
    throw InvalidArgumentError("starting point is not in the risk-neutral set");
  }
  AlternationTrace trace;
  Distribution pi = pi0;
  for (int k = 0; k < max_iters; ++k) {
    std::optional<LogNormalFit> fit;
    try {
      fit = fit_lognormal_moments(pi, set.market().grid());
    } catch (const DegenerateFitError&) {
      trace.stop_reason = "degenerate_fit";
      return trace;
    }
    Distribution eta = discretize_lognormal(*fit);
    Distribution next = kl_project(set, eta, opts);
    const double div = kl_divergence(next.probs(), eta.probs());
    trace.iterations.push_back({next, *fit, eta, div});
    pi = std::move(next);
    if (div <= tol_div) {
      trace.converged = true;
      trace.stop_reason = "converged";
      return trace;
    }
  }
  trace.stop_reason = "max_iters";
  return trace;
}

/// Runs the alternation from each start and keeps the trace with the
/// smallest final divergence.
inline AlternationTrace closest_lognormal(const RiskNeutralSet& set, const std::vector<Distribution>& starts,
                                          int max_iters = 50, double tol_div = 1e-6,
                                          const SolverOptions& opts = {}) {
  if (starts.empty()) {
    throw InvalidArgumentError("need at least one starting point");
  }
  AlternationTrace best;
  bool have = false;
  for (const auto& s : starts) {
    AlternationTrace t = closest_lognormal(set, s, max_iters, tol_div, opts);
    if (t.iterations.empty()) {
      if (!have) {
        best = std::move(t);
      }
      continue;
    }
    if (!have || best.iterations.empty() || t.final_divergence() < best.final_divergence()) {
      best = std::move(t);
      have = true;
    }
  }
  return best;
}

/// Maximum entropy point plus `n_random` solutions of random linear
/// objectives over Pi.
inline std::vector<Distribution> default_starts(const RiskNeutralSet& set, int n_random = 4,
                                                std::uint64_t seed = 20190101,
                                                const SolverOptions& opts = {}) {
  std::vector<Distribution> out{max_entropy(set, opts)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  for (int k = 0; k < n_random; ++k) {
    Eigen::VectorXd c(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      c[i] = n01(rng);
    }
    const auto r = solve_linear(set, {c, Sense::Minimize, {}}, opts);
    if (r.optimal() && set.contains(r.pi->probs())) {
      out.push_back(*r.pi);
    }
  }
  return out;
}

inline double annualized_volatility(double sigma, double days_to_expiry, double day_count = 365.0) {
  if (!(days_to_expiry > 0.0) || !(day_count > 0.0)) {
    throw InvalidArgumentError("days_to_expiry and day_count must be positive");
  }
  if (!(sigma >= 0.0)) {
    throw InvalidArgumentError("sigma must be nonnegative");
  }
  return sigma * std::sqrt(day_count / days_to_expiry);
}

inline double annualized_volatility(const LogNormalFit& fit, double days_to_expiry, double day_count = 365.0) {
  return annualized_volatility(fit.sigma, days_to_expiry, day_count);
}

} // namespace rnp
