#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "rnp/detail/ipm.hpp"
#include "rnp/error.hpp"
#include "rnp/polytope.hpp"

namespace rnp {

enum class Sense { Minimize, Maximize };

/// Extra nonnegative variables u attached to a problem over pi:
///
///   G pi + cost_rows u <= rhs_scale * h
///   1^T pi + normalization^T u == normalization_rhs
///   row_lower <= rows_pi pi + rows_aux u <= row_upper
///
/// Used for the Charnes-Cooper ratio transform, the worst-case-return LP
/// behind arbitrage detection and epigraph forms.
struct AuxiliaryBlock {
  Eigen::Index count = 0;
  Eigen::VectorXd objective;    // count
  Eigen::MatrixXd cost_rows;    // num_rows x count
  double rhs_scale = 1.0;
  Eigen::VectorXd normalization; // count
  double normalization_rhs = 1.0;
  Eigen::MatrixXd rows_pi;      // k x m
  Eigen::MatrixXd rows_aux;     // k x count
  Eigen::VectorXd row_lower;    // k
  Eigen::VectorXd row_upper;    // k
};

struct LinearProgramOverPi {
  Eigen::VectorXd objective;
  Sense sense = Sense::Minimize;
  std::optional<AuxiliaryBlock> aux;
};

/// Relative entropy sum pi_i log(pi_i / eta_i); maximum entropy when
/// `reference` is absent.
struct EntropyProgramOverPi {
  std::optional<Distribution> reference;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

inline std::string to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::Optimal: return "optimal";
  case SolveStatus::Infeasible: return "infeasible";
  case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct SolverOptions {
  detail::IpmOptions ipm;
};

/// Outcome of an optimization over Pi.
///
/// Duals refer to the minimization actually solved (for Maximize that is
/// minimize -objective) and satisfy the stationarity condition
///   grad L(pi) + G^T lambda - nu 1 - z = 0,  lambda >= 0, z >= 0,
/// where G stacks P^T over the extra rows.
struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string solver_status;
  /// Optimal value of the objective in the requested sense.
  double value = 0.0;
  /// The pi block, clamped and renormalized; absent unless the block is a
  /// distribution (always, unless an auxiliary block rescales it).
  std::optional<Distribution> pi;
  Eigen::VectorXd pi_block;
  Eigen::VectorXd aux_values;
  Eigen::VectorXd duals_on_costs;      // n
  Eigen::VectorXd duals_on_extra_rows; // k
  Eigen::VectorXd duals_on_aux_rows;   // signed: lower multiplier minus upper multiplier
  double dual_normalization = 0.0;     // nu
  Eigen::VectorXd reduced_costs;       // z, on the pi block
  int iterations = 0;

  bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

namespace detail {

struct PiProblem {
  const RiskNeutralSet* set = nullptr;
  Eigen::VectorXd pi_cost;
  const AuxiliaryBlock* aux = nullptr;
  bool entropy = false;
  Eigen::VectorXd reference;
};

inline ConvexProgram build_program(const PiProblem& pp) {
  const RiskNeutralSet& set = *pp.set;
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  const auto rows = static_cast<Eigen::Index>(set.num_rows());
  const Eigen::Index a = pp.aux ? pp.aux->count : 0;
  const Eigen::Index k = pp.aux ? pp.aux->rows_pi.rows() : 0;

  ConvexProgram prog;
  prog.A = Eigen::MatrixXd::Zero(rows + 1 + k, m + a);
  prog.row_lower = Eigen::VectorXd::Constant(rows + 1 + k, -kInf);
  prog.row_upper.resize(rows + 1 + k);

  prog.A.topLeftCorner(rows, m) = set.constraint_matrix();
  prog.row_upper.head(rows) = set.constraint_rhs() * (pp.aux ? pp.aux->rhs_scale : 1.0);
  prog.A.block(rows, 0, 1, m).setOnes();
  prog.row_lower[rows] = prog.row_upper[rows] = pp.aux ? pp.aux->normalization_rhs : 1.0;
  if (pp.aux) {
    const auto& ax = *pp.aux;
    if (a > 0) {
      prog.A.topRightCorner(rows, a) = ax.cost_rows;
      prog.A.block(rows, m, 1, a) = ax.normalization.transpose();
    }
    if (k > 0) {
      prog.A.bottomLeftCorner(k, m) = ax.rows_pi;
      if (a > 0) {
        prog.A.bottomRightCorner(k, a) = ax.rows_aux;
      }
      prog.row_lower.tail(k) = ax.row_lower;
      prog.row_upper.tail(k) = ax.row_upper;
    }
  }
  prog.cost = Eigen::VectorXd::Zero(m + a);
  prog.cost.head(m) = pp.pi_cost;
  if (pp.aux && a > 0) {
    prog.cost.tail(a) = pp.aux->objective;
  }
  if (pp.entropy) {
    prog.entropy_weight = Eigen::VectorXd::Zero(m + a);
    prog.entropy_weight.head(m).setOnes();
    prog.entropy_reference = Eigen::VectorXd::Ones(m + a);
    prog.entropy_reference.head(m) = pp.reference;
  }
  return prog;
}

inline void validate_aux(const RiskNeutralSet& set, const AuxiliaryBlock& ax) {
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  const auto rows = static_cast<Eigen::Index>(set.num_rows());
  const Eigen::Index k = ax.rows_pi.rows();
  const bool ok = ax.count >= 0 && ax.objective.size() == ax.count &&
                  (ax.count == 0 || (ax.cost_rows.rows() == rows && ax.cost_rows.cols() == ax.count)) &&
                  ax.normalization.size() == ax.count && (k == 0 || ax.rows_pi.cols() == m) &&
                  (k == 0 || ax.count == 0 || (ax.rows_aux.rows() == k && ax.rows_aux.cols() == ax.count)) &&
                  ax.row_lower.size() == k && ax.row_upper.size() == k;
  if (!ok) {
    throw InvalidArgumentError("auxiliary block dimensions do not match the problem");
  }
}

/// Runs the solver and unpacks the result; no classification of failures.
inline SolveResult run(const PiProblem& pp, double sign, const SolverOptions& opts) {
  const RiskNeutralSet& set = *pp.set;
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  const auto n = static_cast<Eigen::Index>(set.num_investments());
  const auto rows = static_cast<Eigen::Index>(set.num_rows());
  const Eigen::Index a = pp.aux ? pp.aux->count : 0;
  const Eigen::Index k = pp.aux ? pp.aux->rows_pi.rows() : 0;

  const ConvexProgram prog = build_program(pp);
  const IpmResult r = solve(prog, opts.ipm);

  SolveResult out;
  out.iterations = r.iterations;
  out.solver_status = to_string(r.status);
  out.status = r.status == IpmStatus::Optimal      ? SolveStatus::Optimal
               : r.status == IpmStatus::Infeasible ? SolveStatus::Infeasible
                                                   : SolveStatus::NumericalFailure;
  out.pi_block = r.x.head(m);
  out.aux_values = r.x.tail(a);
  const Eigen::VectorXd lam = r.lambda_upper - r.lambda_lower;
  out.duals_on_costs = lam.head(n).cwiseMax(0.0);
  out.duals_on_extra_rows = lam.segment(n, rows - n).cwiseMax(0.0);
  out.dual_normalization = r.lambda_lower[rows] - r.lambda_upper[rows];
  out.duals_on_aux_rows = -lam.tail(k);
  out.reduced_costs = r.reduced_cost.head(m);
  out.value = sign * r.objective;
  return out;
}

inline Eigen::VectorXd validated_reference(const RiskNeutralSet& set,
                                           const std::optional<Distribution>& ref) {
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  if (!ref) {
    return Eigen::VectorXd::Ones(m);
  }
  if (static_cast<Eigen::Index>(ref->size()) != m) {
    throw InvalidReferenceError("reference distribution length does not match the grid");
  }
  const Eigen::VectorXd& eta = ref->probs();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(eta[i] >= 1e-300)) {
      throw InvalidReferenceError("reference distribution has a zero entry at index " +
                                  std::to_string(i));
    }
  }
  return eta / eta.sum();
}

/// Auxiliary block for min theta s.t. G pi - theta 1 <= h over the simplex;
/// theta* > 0 iff Pi is empty.
inline AuxiliaryBlock worst_case_block(const RiskNeutralSet& set) {
  const auto rows = static_cast<Eigen::Index>(set.num_rows());
  AuxiliaryBlock ax;
  ax.count = 1;
  ax.objective = Eigen::VectorXd::Ones(1);
  ax.cost_rows = -Eigen::MatrixXd::Ones(rows, 1);
  ax.normalization = Eigen::VectorXd::Zero(1);
  return ax;
}

inline SolveResult solve_worst_case(const RiskNeutralSet& set, const SolverOptions& opts) {
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  const AuxiliaryBlock ax = worst_case_block(set);
  PiProblem pp{&set, Eigen::VectorXd::Zero(m), &ax, false, {}};
  return run(pp, 1.0, opts);
}

/// After a failed solve, decides between an empty Pi and a solver breakdown.
inline void classify_failure(const RiskNeutralSet& set, SolveResult& out, const SolverOptions& opts) {
  const SolveResult wc = solve_worst_case(set, opts);
  if (wc.optimal() && wc.aux_values.size() == 1) {
    out.status = wc.aux_values[0] > set.tolerances().arb ? SolveStatus::Infeasible
                                                         : SolveStatus::NumericalFailure;
  }
}

} // namespace detail

/// Minimizes or maximizes a linear function over Pi (plus optional
/// auxiliary variables).
inline SolveResult solve_linear(const RiskNeutralSet& set, const LinearProgramOverPi& prog,
                                const SolverOptions& opts = {}) {
  if (static_cast<std::size_t>(prog.objective.size()) != set.num_outcomes()) {
    throw InvalidArgumentError("objective length must equal the number of outcomes");
  }
  if (prog.aux) {
    detail::validate_aux(set, *prog.aux);
  }
  const double sign = prog.sense == Sense::Maximize ? -1.0 : 1.0;
  AuxiliaryBlock aux_signed;
  const AuxiliaryBlock* aux = nullptr;
  if (prog.aux) {
    aux_signed = *prog.aux;
    aux_signed.objective *= sign;
    aux = &aux_signed;
  }
  detail::PiProblem pp{&set, sign * prog.objective, aux, false, {}};
  SolveResult out = detail::run(pp, sign, opts);
  if (!out.optimal() && !prog.aux) {
    detail::classify_failure(set, out, opts);
  }
  if (out.optimal()) {
    const bool is_distribution =
        !prog.aux || (prog.aux->normalization.isZero() && prog.aux->normalization_rhs == 1.0);
    if (is_distribution) {
      out.pi = Distribution::from_solver(out.pi_block);
      double v = prog.objective.dot(out.pi->probs());
      if (prog.aux && prog.aux->count > 0) {
        v += prog.aux->objective.dot(out.aux_values);
      }
      out.value = v;
    }
  }
  return out;
}

/// Minimizes sum pi_i log(pi_i / eta_i) over Pi. With no reference the
/// objective is sum pi_i log pi_i (negative entropy).
inline SolveResult solve_entropy(const RiskNeutralSet& set, const EntropyProgramOverPi& prog,
                                 const SolverOptions& opts = {}) {
  const Eigen::VectorXd eta = detail::validated_reference(set, prog.reference);
  const auto m = static_cast<Eigen::Index>(set.num_outcomes());
  detail::PiProblem pp{&set, Eigen::VectorXd::Zero(m), nullptr, true, eta};
  SolveResult out = detail::run(pp, 1.0, opts);
  if (!out.optimal()) {
    detail::classify_failure(set, out, opts);
  }
  if (out.optimal()) {
    out.pi = Distribution::from_solver(out.pi_block);
    out.value = prog.reference ? kl_divergence(out.pi->probs(), eta) : -out.pi->entropy();
  }
  return out;
}

} // namespace rnp
