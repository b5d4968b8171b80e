#pragma once

#include <algorithm>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "rnp/error.hpp"
#include "rnp/optimize.hpp"
#include "rnp/polytope.hpp"

namespace rnp {

/// Nonnegative weights on the rows of the set (investments first, then
/// extra constraint rows) whose portfolio returns at least
/// `guaranteed_return` in every outcome.
struct ArbitrageCertificate {
  Eigen::VectorXd weights;
  double guaranteed_return = 0.0;
};

struct NoArbitrage {
  Distribution pi;
};

struct Arbitrage {
  ArbitrageCertificate certificate;
};

using ArbitrageResult = std::variant<NoArbitrage, Arbitrage>;

inline bool has_arbitrage(const ArbitrageResult& r) { return std::holds_alternative<Arbitrage>(r); }

/// min_i (G^T w)_i - h^T w, computed directly from the data.
inline double worst_case_return(const RiskNeutralSet& set, const Eigen::VectorXd& w) {
  if (w.size() != static_cast<Eigen::Index>(set.num_rows())) {
    throw InvalidArgumentError("weight vector length must equal the number of rows");
  }
  const Eigen::VectorXd ret = set.constraint_matrix().transpose() * w;
  return ret.minCoeff() - set.constraint_rhs().dot(w);
}

/// Re-checks a certificate with plain arithmetic.
inline bool verify_certificate(const RiskNeutralSet& set, const ArbitrageCertificate& cert,
                               double tol_feas = -1.0) {
  if (tol_feas < 0.0) {
    tol_feas = set.tolerances().feas;
  }
  if (cert.weights.size() != static_cast<Eigen::Index>(set.num_rows()) ||
      !cert.weights.allFinite() || cert.weights.minCoeff() < 0.0 || !(cert.guaranteed_return > 0.0)) {
    return false;
  }
  const double scale = 1.0 + cert.weights.sum();
  return worst_case_return(set, cert.weights) >= cert.guaranteed_return - tol_feas * scale;
}

/// Solves min theta s.t. G pi - theta 1 <= h over the simplex. Its dual is
/// max t s.t. G^T w - (h^T w) 1 >= t 1, w >= 0, 1^T w <= 1, so theta* > tol_arb
/// means arbitrage and the row multipliers are the portfolio.
inline ArbitrageResult check_arbitrage(const RiskNeutralSet& set, const SolverOptions& opts = {}) {
  const Tolerances& tol = set.tolerances();
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  if (set.num_rows() == 0) {
    return NoArbitrage{Distribution::uniform(set.num_outcomes())};
  }

  const SolveResult wc = detail::solve_worst_case(set, opts);
  if (!wc.optimal()) {
    throw NumericalFailureError("worst-case return problem did not solve", wc.solver_status);
  }
  const double theta = wc.aux_values[0];

  Eigen::VectorXd w(static_cast<Eigen::Index>(set.num_rows()));
  w << wc.duals_on_costs, wc.duals_on_extra_rows;
  w = w.cwiseMax(0.0);
  if (w.sum() > 1.0) {
    w /= w.sum();
  }
  ArbitrageCertificate cert{w, w.sum() > 0.0 ? worst_case_return(set, w) : 0.0};

  if (theta > tol.arb) {
    if (!verify_certificate(set, cert)) {
      throw NumericalFailureError("arbitrage certificate failed verification", wc.solver_status);
    }
    return Arbitrage{cert};
  }

  // Feasible side: a point of Pi itself, not the theta-relaxed one.
  const SolveResult feas = solve_linear(set, LinearProgramOverPi{Eigen::VectorXd::Zero(m), Sense::Minimize, {}}, opts);
  if (feas.optimal() && feas.pi && set.contains(feas.pi->probs())) {
    return NoArbitrage{*feas.pi};
  }
  const Distribution relaxed = Distribution::from_solver(wc.pi_block);
  if (set.contains(relaxed.probs())) {
    return NoArbitrage{relaxed};
  }
  // theta is within tol_arb of zero but no exact member was found.
  if (cert.guaranteed_return > 0.0 && verify_certificate(set, cert)) {
    return Arbitrage{cert};
  }
  return NoArbitrage{relaxed};
}

} // namespace rnp
