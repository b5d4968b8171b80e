#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rnp/error.hpp"
#include "rnp/market.hpp"
#include "rnp/tolerances.hpp"

namespace rnp {

/// A probability vector on the price grid.
class Distribution {
public:
  /// Validates `probs` against the simplex with tolerance `tol`, then clamps
  /// small negative entries to zero and renormalizes.
  explicit Distribution(Eigen::VectorXd probs, double tol = 1e-9) : probs_(std::move(probs)) {
    if (probs_.size() == 0) {
      throw InvalidArgumentError("distribution must have at least one outcome");
    }
    if (!probs_.allFinite()) {
      throw InvalidArgumentError("distribution entries must be finite");
    }
    if (probs_.minCoeff() < -tol) {
      throw InvalidArgumentError("distribution has a negative entry");
    }
    if (std::abs(probs_.sum() - 1.0) > tol) {
      throw InvalidArgumentError("distribution does not sum to one");
    }
    normalize();
  }

  static Distribution uniform(std::size_t m) {
    return Distribution(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                                  1.0 / static_cast<double>(m)));
  }

  /// Clamp-and-renormalize without the simplex check; for solver output.
  static Distribution from_solver(const Eigen::VectorXd& raw) {
    Eigen::VectorXd p = raw.cwiseMax(0.0);
    const double total = p.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw NumericalFailureError("solver returned a vector with no mass", "invalid_primal");
    }
    p /= total;
    return Distribution(std::move(p), 1e-6);
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& probs() const noexcept { return probs_; }

  double expectation(const Eigen::VectorXd& g) const { return probs_.dot(g); }

  /// Shannon entropy in nats, with 0 log 0 = 0.
  double entropy() const {
    double h = 0.0;
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
      if (probs_[i] > 0.0) {
        h -= probs_[i] * std::log(probs_[i]);
      }
    }
    return h;
  }

private:
  void normalize() {
    probs_ = probs_.cwiseMax(0.0);
    probs_ /= probs_.sum();
  }

  Eigen::VectorXd probs_;
};

/// KL(p || q) in nats. Infinite when p puts mass where q has none.
inline double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (!(q[i] > 0.0)) {
        return std::numeric_limits<double>::infinity();
      }
      d += p[i] * std::log(p[i] / q[i]);
    }
  }
  return d;
}

/// a^T pi <= b, appended to the cost constraints as a synthetic investment
/// with payoff a and cost b.
struct ConstraintRow {
  Eigen::VectorXd payoff;
  double bound = 0.0;
  std::string label;
};

struct MembershipReport {
  bool member = false;
  double simplex_violation = 0.0;
  /// Largest scaled residual max(0, a^T pi - b) / (1 + |b| + max|a|) over all rows.
  double max_row_violation = 0.0;
  std::ptrdiff_t worst_row = -1;
};

/// Pi = { pi in simplex : P^T pi <= c, a_k^T pi <= b_k }.
///
/// Immutable; add_constraint returns a new set sharing the market.
class RiskNeutralSet {
public:
  explicit RiskNeutralSet(Market market, Tolerances tol = {})
      : market_(std::make_shared<const Market>(std::move(market))), tol_(tol) {
    rebuild();
  }

  RiskNeutralSet add_constraint(Eigen::VectorXd a, double b, std::string label = {}) const {
    if (static_cast<std::size_t>(a.size()) != num_outcomes()) {
      throw InvalidArgumentError("constraint vector length must equal the number of outcomes");
    }
    if (!a.allFinite() || !std::isfinite(b)) {
      throw InvalidArgumentError("constraint entries must be finite");
    }
    RiskNeutralSet out = *this;
    if (label.empty()) {
      label = "constraint " + std::to_string(extra_.size());
    }
    out.extra_.push_back({std::move(a), b, std::move(label)});
    out.rebuild();
    return out;
  }

  /// a^T pi == b, stored as the two rows (a, b) and (-a, -b).
  RiskNeutralSet add_equality(const Eigen::VectorXd& a, double b, std::string label = {}) const {
    return add_constraint(a, b, label + "(<=)").add_constraint(-a, -b, label + "(>=)");
  }

  RiskNeutralSet with_tolerances(Tolerances tol) const {
    RiskNeutralSet out = *this;
    out.tol_ = tol;
    return out;
  }

  const Market& market() const noexcept { return *market_; }
  const std::vector<ConstraintRow>& extra_rows() const noexcept { return extra_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

  std::size_t num_outcomes() const noexcept { return market_->num_outcomes(); }
  std::size_t num_investments() const noexcept { return market_->num_investments(); }
  /// Investments followed by extra rows.
  std::size_t num_rows() const noexcept { return num_investments() + extra_.size(); }

  /// Rows of the constraint system G pi <= h: P^T stacked over the extra rows.
  const Eigen::MatrixXd& constraint_matrix() const noexcept { return *rows_; }
  const Eigen::VectorXd& constraint_rhs() const noexcept { return rhs_; }

  std::string row_label(std::size_t r) const {
    if (r < num_investments()) {
      return market_->instruments()[r].display_name();
    }
    return extra_[r - num_investments()].label;
  }

  double row_scale(Eigen::Index r) const {
    const double amax = rows_->cols() > 0 ? rows_->row(r).cwiseAbs().maxCoeff() : 0.0;
    return 1.0 + std::abs(rhs_[r]) + amax;
  }

  /// Membership check with tolerance `tol_feas` (defaults to the set's feas tolerance).
  MembershipReport membership(const Eigen::VectorXd& pi, double tol_feas = -1.0) const {
    if (tol_feas < 0.0) {
      tol_feas = tol_.feas;
    }
    MembershipReport rep;
    if (static_cast<std::size_t>(pi.size()) != num_outcomes()) {
      throw InvalidArgumentError("distribution length does not match the grid");
    }
    rep.simplex_violation =
        std::max(std::abs(pi.sum() - 1.0), std::max(0.0, -pi.minCoeff()));
    const Eigen::VectorXd act = (*rows_) * pi;
    for (Eigen::Index r = 0; r < act.size(); ++r) {
      const double v = std::max(0.0, act[r] - rhs_[r]) / row_scale(r);
      if (v > rep.max_row_violation) {
        rep.max_row_violation = v;
        rep.worst_row = r;
      }
    }
    rep.member = rep.simplex_violation <= std::max(tol_feas, tol_.simplex) &&
                 rep.max_row_violation <= tol_feas;
    return rep;
  }

  bool contains(const Eigen::VectorXd& pi, double tol_feas = -1.0) const {
    return membership(pi, tol_feas).member;
  }

private:
  void rebuild() {
    const auto m = static_cast<Eigen::Index>(num_outcomes());
    const auto n = static_cast<Eigen::Index>(num_investments());
    const auto k = static_cast<Eigen::Index>(extra_.size());
    auto g = std::make_shared<Eigen::MatrixXd>(n + k, m);
    g->topRows(n) = market_->payoff_matrix().transpose();
    rhs_.resize(n + k);
    rhs_.head(n) = market_->cost_vector();
    for (Eigen::Index r = 0; r < k; ++r) {
      g->row(n + r) = extra_[static_cast<std::size_t>(r)].payoff.transpose();
      rhs_[n + r] = extra_[static_cast<std::size_t>(r)].bound;
    }
    rows_ = std::move(g);
  }

  std::shared_ptr<const Market> market_;
  std::vector<ConstraintRow> extra_;
  Tolerances tol_;
  std::shared_ptr<const Eigen::MatrixXd> rows_;
  Eigen::VectorXd rhs_;
};

} // namespace rnp
