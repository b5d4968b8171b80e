#pragma once

// Dense primal-dual interior point method for
//
//   minimize    c^T x + sum_i w_i x_i log(x_i / eta_i)
//   subject to  l <= A x <= u,  x >= 0
//
// with few rows (investments) and many columns (outcomes). Each Newton step
// solves the normal equations A D A^T dy = r, which is (rows x rows), so the
// cost per iteration is O(rows^2 cols).
//
// Rows that are exact multiples of +-1 of each other (buy/sell pairs of the
// same payoff) are merged into one ranged row before the solve; multipliers
// are mapped back to the original rows afterwards.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace rnp::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConvexProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd row_lower;
  Eigen::VectorXd row_upper;
  Eigen::VectorXd cost;
  /// Empty, or one weight per column; nonzero weights add w x log(x / eta).
  Eigen::VectorXd entropy_weight;
  Eigen::VectorXd entropy_reference;

  bool has_entropy() const { return entropy_weight.size() > 0 && entropy_weight.maxCoeff() > 0.0; }
};

enum class IpmStatus { Optimal, Infeasible, IterationLimit, NumericalFailure };

inline std::string to_string(IpmStatus s) {
  switch (s) {
  case IpmStatus::Optimal: return "optimal";
  case IpmStatus::Infeasible: return "infeasible";
  case IpmStatus::IterationLimit: return "iteration_limit";
  case IpmStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct IpmOptions {
  double tolerance = 1e-10;
  /// Complementarity target for entropy objectives. Primal error on a
  /// degenerate optimal face scales like sqrt(gap), hence the tighter value.
  double entropy_gap_tolerance = 1e-15;
  /// Accepted when the iteration stalls before reaching `tolerance`.
  double loose_tolerance = 1e-8;
  int max_iterations = 200;
  /// Per-iteration residuals on stderr.
  bool verbose = false;
};

struct IpmResult {
  IpmStatus status = IpmStatus::NumericalFailure;
  Eigen::VectorXd x;
  /// Multiplier of a_r^T x <= u_r, per original row (>= 0).
  Eigen::VectorXd lambda_upper;
  /// Multiplier of a_r^T x >= l_r, per original row (>= 0).
  Eigen::VectorXd lambda_lower;
  /// Multiplier of x >= 0.
  Eigen::VectorXd reduced_cost;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = kInf;
  double dual_residual = kInf;
  double gap = kInf;
};

namespace ipm_impl {

inline double entropy_term(double x, double w, double eta) {
  if (w == 0.0 || x <= 0.0) {
    return 0.0;
  }
  return w * x * std::log(x / eta);
}

struct MergedRow {
  Eigen::Index source = 0;      // representative original row (defines orientation +1)
  double lower = -kInf;
  double upper = kInf;
  Eigen::Index lower_from = -1; // original row providing the binding lower bound
  bool lower_from_flipped = false;
  Eigen::Index upper_from = -1;
  bool upper_from_flipped = false;
};

struct Presolved {
  std::vector<MergedRow> rows;
  // Rows of the merged system in the orientation of their representative.
  Eigen::MatrixXd A;
  bool infeasible = false;
};

inline std::uint64_t hash_row(const Eigen::MatrixXd& a, Eigen::Index r, double sign) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    double v = sign * a(r, j);
    if (v == 0.0) {
      v = 0.0; // fold -0.0
    }
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    h ^= bits;
    h *= 1099511628211ULL;
  }
  return h;
}

inline bool rows_equal(const Eigen::MatrixXd& a, Eigen::Index r1, Eigen::Index r2, double sign) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (a(r1, j) != sign * a(r2, j)) {
      return false;
    }
  }
  return true;
}

inline Presolved presolve(const ConvexProgram& prog) {
  Presolved out;
  const Eigen::Index rows = prog.A.rows();
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  std::vector<Eigen::Index> keep;

  for (Eigen::Index r = 0; r < rows; ++r) {
    double lo = prog.row_lower[r];
    double hi = prog.row_upper[r];
    if (lo == -kInf && hi == kInf) {
      continue;
    }
    Eigen::Index first = -1;
    for (Eigen::Index j = 0; j < prog.A.cols(); ++j) {
      if (prog.A(r, j) != 0.0) {
        first = j;
        break;
      }
    }
    if (first < 0) {
      const double slack = 1e-12 * (1.0 + std::max(std::abs(lo == -kInf ? 0.0 : lo),
                                                   std::abs(hi == kInf ? 0.0 : hi)));
      if (lo > slack || hi < -slack) {
        out.infeasible = true;
      }
      continue;
    }
    const bool flipped = prog.A(r, first) < 0.0;
    const double sign = flipped ? -1.0 : 1.0;
    if (flipped) {
      std::swap(lo, hi);
      lo = -lo;
      hi = -hi;
    }
    const std::uint64_t h = hash_row(prog.A, r, sign);
    auto& bucket = buckets[h];
    std::size_t target = out.rows.size();
    for (std::size_t idx : bucket) {
      const Eigen::Index src = out.rows[idx].source;
      const double src_sign = prog.A(src, first) < 0.0 ? -1.0 : 1.0;
      // sign * a_r == src_sign * a_src
      if (rows_equal(prog.A, r, src, sign * src_sign)) {
        target = idx;
        break;
      }
    }
    if (target == out.rows.size()) {
      MergedRow mr;
      mr.source = r;
      out.rows.push_back(mr);
      bucket.push_back(target);
      keep.push_back(r);
    }
    MergedRow& mr = out.rows[target];
    // Orientation of the merged row is that of its source, which is always
    // the canonical (first nonzero positive) orientation.
    if (lo > mr.lower) {
      mr.lower = lo;
      mr.lower_from = r;
      mr.lower_from_flipped = flipped;
    }
    if (hi < mr.upper) {
      mr.upper = hi;
      mr.upper_from = r;
      mr.upper_from_flipped = flipped;
    }
  }

  out.A.resize(static_cast<Eigen::Index>(out.rows.size()), prog.A.cols());
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const Eigen::Index src = out.rows[k].source;
    Eigen::Index first = 0;
    while (prog.A(src, first) == 0.0) {
      ++first;
    }
    const double sign = prog.A(src, first) < 0.0 ? -1.0 : 1.0;
    out.A.row(static_cast<Eigen::Index>(k)) = sign * prog.A.row(src);
    auto& mr = out.rows[k];
    if (mr.lower > mr.upper) {
      const double scale = 1.0 + std::max(std::abs(mr.lower), std::abs(mr.upper));
      if (mr.lower - mr.upper > 1e-11 * scale) {
        out.infeasible = true;
      } else {
        mr.lower = mr.upper = 0.5 * (mr.lower + mr.upper);
      }
    } else if (std::isfinite(mr.upper) && std::isfinite(mr.lower) &&
               mr.upper - mr.lower <= 1e-12 * (1.0 + std::abs(mr.upper))) {
      mr.lower = mr.upper = 0.5 * (mr.lower + mr.upper);
    }
  }
  return out;
}

enum class SlackKind { None, Lower, Boxed };

} // namespace ipm_impl

/// Solves `prog`. Never throws on numerical trouble; inspect `status`.
inline IpmResult solve(const ConvexProgram& prog, const IpmOptions& opt = {}) {
  using namespace ipm_impl;
  using Eigen::Index;
  using Eigen::VectorXd;

  const Index n_cols = prog.A.cols();
  const Index n_orig_rows = prog.A.rows();
  const bool entropic = prog.has_entropy();

  IpmResult result;
  result.x = VectorXd::Zero(n_cols);
  result.lambda_upper = VectorXd::Zero(n_orig_rows);
  result.lambda_lower = VectorXd::Zero(n_orig_rows);
  result.reduced_cost = VectorXd::Zero(n_cols);

  Presolved pre = presolve(prog);
  if (pre.infeasible) {
    result.status = IpmStatus::Infeasible;
    return result;
  }
  const Index R = pre.A.rows();

  // Internal row form: a^T x + s = b with s = 0 (equality), s >= 0, or 0 <= s <= ub.
  Eigen::MatrixXd A = pre.A;
  VectorXd b(R), ub = VectorXd::Zero(R);
  std::vector<SlackKind> kind(static_cast<std::size_t>(R));
  std::vector<double> orient(static_cast<std::size_t>(R), 1.0);
  for (Index r = 0; r < R; ++r) {
    const auto& mr = pre.rows[static_cast<std::size_t>(r)];
    const auto k = static_cast<std::size_t>(r);
    if (mr.lower == mr.upper) {
      kind[k] = SlackKind::None;
      b[r] = mr.upper;
    } else if (mr.upper < kInf) {
      b[r] = mr.upper;
      if (mr.lower > -kInf) {
        kind[k] = SlackKind::Boxed;
        ub[r] = mr.upper - mr.lower;
      } else {
        kind[k] = SlackKind::Lower;
      }
    } else {
      orient[k] = -1.0;
      A.row(r) *= -1.0;
      b[r] = -mr.lower;
      kind[k] = SlackKind::Lower;
    }
  }

  // Ruiz equilibration.
  VectorXd row_scale = VectorXd::Ones(R), col_scale = VectorXd::Ones(n_cols);
  for (int pass = 0; pass < 12 && R > 0; ++pass) {
    VectorXd rmax = A.cwiseAbs().rowwise().maxCoeff();
    VectorXd cmax = A.cwiseAbs().colwise().maxCoeff().transpose();
    for (Index r = 0; r < R; ++r) {
      const double f = rmax[r] > 0.0 ? 1.0 / std::sqrt(rmax[r]) : 1.0;
      A.row(r) *= f;
      row_scale[r] *= f;
    }
    for (Index j = 0; j < n_cols; ++j) {
      const double f = cmax[j] > 0.0 ? 1.0 / std::sqrt(cmax[j]) : 1.0;
      A.col(j) *= f;
      col_scale[j] *= f;
    }
  }
  b = b.cwiseProduct(row_scale);
  ub = ub.cwiseProduct(row_scale);

  VectorXd c = prog.cost.cwiseProduct(col_scale);
  VectorXd w = VectorXd::Zero(n_cols), eta = VectorXd::Ones(n_cols);
  if (entropic) {
    w = prog.entropy_weight.cwiseProduct(col_scale);
    for (Index j = 0; j < n_cols; ++j) {
      if (w[j] > 0.0) {
        eta[j] = prog.entropy_reference[j] / col_scale[j];
      }
    }
  }
  double obj_scale = std::max(c.lpNorm<Eigen::Infinity>(), w.lpNorm<Eigen::Infinity>());
  obj_scale = obj_scale > 0.0 ? 1.0 / obj_scale : 1.0;
  c *= obj_scale;
  w *= obj_scale;

  VectorXd has_slack(R), boxed(R);
  for (Index r = 0; r < R; ++r) {
    has_slack[r] = kind[static_cast<std::size_t>(r)] != SlackKind::None ? 1.0 : 0.0;
    boxed[r] = kind[static_cast<std::size_t>(r)] == SlackKind::Boxed ? 1.0 : 0.0;
  }

  auto gradient = [&](const VectorXd& x) {
    VectorXd g = c;
    if (entropic) {
      for (Index j = 0; j < n_cols; ++j) {
        if (w[j] > 0.0) {
          g[j] += w[j] * (std::log(x[j] / eta[j]) + 1.0);
        }
      }
    }
    return g;
  };
  auto hessian = [&](const VectorXd& x) {
    VectorXd h = VectorXd::Zero(n_cols);
    if (entropic) {
      for (Index j = 0; j < n_cols; ++j) {
        if (w[j] > 0.0) {
          h[j] = w[j] / x[j];
        }
      }
    }
    return h;
  };
  auto objective_of = [&](const VectorXd& x) {
    double f = c.dot(x);
    if (entropic) {
      for (Index j = 0; j < n_cols; ++j) {
        f += entropy_term(x[j], w[j], eta[j]);
      }
    }
    return f;
  };

  // Normal-equation machinery.
  Eigen::MatrixXd M(R, R), B(R, n_cols);
  Eigen::LLT<Eigen::MatrixXd> llt;
  VectorXd Dx(n_cols), Ds(R);

  auto factor = [&](const VectorXd& dx, const VectorXd& ds) -> bool {
    B = A * dx.cwiseSqrt().asDiagonal();
    M.setZero();
    M.selfadjointView<Eigen::Lower>().rankUpdate(B);
    for (Index r = 0; r < R; ++r) {
      M(r, r) += ds[r];
    }
    double reg = 1e-14;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::MatrixXd Mr = M;
      for (Index r = 0; r < R; ++r) {
        Mr(r, r) += reg * M(r, r) + 1e-300;
      }
      llt.compute(Mr.selfadjointView<Eigen::Lower>());
      if (llt.info() == Eigen::Success) {
        return true;
      }
      reg *= 100.0;
    }
    return false;
  };
  auto solve_normal = [&](const VectorXd& rhs) {
    VectorXd sol = llt.solve(rhs);
    for (int it = 0; it < 2; ++it) {
      VectorXd res = rhs - M.selfadjointView<Eigen::Lower>() * sol;
      sol += llt.solve(res);
    }
    return sol;
  };

  struct Direction {
    VectorXd dx, ds, dt, dy, dzx, dzs, dzt;
  };

  VectorXd x(n_cols), s = VectorXd::Zero(R), t = VectorXd::Zero(R);
  VectorXd y = VectorXd::Zero(R), zx(n_cols), zs = VectorXd::Zero(R), zt = VectorXd::Zero(R);

  // Starting point (Mehrotra's heuristic on the slack-augmented system).
  {
    VectorXd dx0 = VectorXd::Ones(n_cols);
    if (!factor(dx0, has_slack)) {
      result.status = IpmStatus::NumericalFailure;
      return result;
    }
    VectorXd v = solve_normal(b);
    x = A.transpose() * v;
    s = v.cwiseProduct(has_slack);
    t = (ub - s).cwiseProduct(boxed);
    VectorXd xfloor = x.cwiseMax(1.0 / static_cast<double>(std::max<Index>(n_cols, 1)));
    VectorXd cg = gradient(xfloor);
    VectorXd y0 = solve_normal(A * cg);
    y = y0;
    zx = cg - A.transpose() * y0;
    for (Index r = 0; r < R; ++r) {
      if (boxed[r] > 0.0) {
        zs[r] = std::max(-y0[r], 0.0);
        zt[r] = std::max(y0[r], 0.0);
      } else if (has_slack[r] > 0.0) {
        zs[r] = -y0[r];
      }
    }
    double pmin = x.size() ? x.minCoeff() : 0.0, dmin = zx.size() ? zx.minCoeff() : 0.0;
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        pmin = std::min(pmin, s[r]);
        dmin = std::min(dmin, zs[r]);
      }
      if (boxed[r] > 0.0) {
        pmin = std::min(pmin, t[r]);
        dmin = std::min(dmin, zt[r]);
      }
    }
    const double dp = std::max(-1.5 * pmin, 0.0);
    const double dd = std::max(-1.5 * dmin, 0.0);
    x.array() += dp;
    zx.array() += dd;
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        s[r] += dp;
        zs[r] += dd;
      }
      if (boxed[r] > 0.0) {
        t[r] += dp;
        zt[r] += dd;
      }
    }
    const double xz = x.dot(zx) + s.dot(zs) + t.dot(zt);
    const double sum_p = x.sum() + s.sum() + t.sum();
    const double sum_d = zx.sum() + zs.sum() + zt.sum();
    const double dp2 = sum_d > 0.0 ? 0.5 * xz / sum_d : 0.0;
    const double dd2 = sum_p > 0.0 ? 0.5 * xz / sum_p : 0.0;
    const double pfloor = 1e-2 / static_cast<double>(std::max<Index>(n_cols, 1));
    const double dfloor = 1e-2;
    for (Index j = 0; j < n_cols; ++j) {
      x[j] = std::max(x[j] + dp2, pfloor);
      zx[j] = std::max(zx[j] + dd2, dfloor);
    }
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        s[r] = std::max(s[r] + dp2, pfloor);
        zs[r] = std::max(zs[r] + dd2, dfloor);
      }
      if (boxed[r] > 0.0) {
        t[r] = std::max(t[r] + dp2, pfloor);
        zt[r] = std::max(zt[r] + dd2, dfloor);
      }
    }
  }

  const double bnorm = std::max(b.lpNorm<Eigen::Infinity>(), ub.lpNorm<Eigen::Infinity>());
  const double cnorm = std::max(c.lpNorm<Eigen::Infinity>(), w.lpNorm<Eigen::Infinity>());
  const double n_comp = static_cast<double>(n_cols) + has_slack.sum() + boxed.sum();

  VectorXd rp, ru, rdx, rds;
  auto compute_residuals = [&]() {
    rp = b - A * x - s;
    ru = (ub - s - t).cwiseProduct(boxed);
    rdx = gradient(x) - A.transpose() * y - zx;
    rds = (-y - zs + zt).cwiseProduct(has_slack);
  };

  auto newton = [&](const VectorXd& rcx, const VectorXd& rcs, const VectorXd& rct) {
    Direction d;
    VectorXd xinv_rc = rcx.cwiseQuotient(x);
    VectorXd qs = VectorXd::Zero(R);
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        qs[r] = rcs[r] / s[r] - rds[r];
        if (boxed[r] > 0.0) {
          qs[r] -= (rct[r] - zt[r] * ru[r]) / t[r];
        }
      }
    }
    VectorXd rhs = rp - A * Dx.cwiseProduct(xinv_rc - rdx) - Ds.cwiseProduct(qs);
    d.dy = solve_normal(rhs);
    d.dx = Dx.cwiseProduct(A.transpose() * d.dy + xinv_rc - rdx);
    d.ds = Ds.cwiseProduct(d.dy + qs);
    d.dt = (ru - d.ds).cwiseProduct(boxed);
    d.dzx = (rcx - zx.cwiseProduct(d.dx)).cwiseQuotient(x);
    d.dzs = VectorXd::Zero(R);
    d.dzt = VectorXd::Zero(R);
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        d.dzs[r] = (rcs[r] - zs[r] * d.ds[r]) / s[r];
      }
      if (boxed[r] > 0.0) {
        d.dzt[r] = (rct[r] - zt[r] * d.dt[r]) / t[r];
      }
    }
    return d;
  };

  auto max_step = [](const VectorXd& v, const VectorXd& dv, const VectorXd* mask) {
    double a = 1.0;
    for (Index i = 0; i < v.size(); ++i) {
      if (mask && (*mask)[i] == 0.0) {
        continue;
      }
      if (dv[i] < 0.0) {
        a = std::min(a, -v[i] / dv[i]);
      }
    }
    return a;
  };

  struct Snapshot {
    VectorXd x, s, t, y, zx, zs, zt;
    double merit = kInf;
    double pres = kInf, dres = kInf, gap = kInf;
  } best;

  IpmStatus status = IpmStatus::IterationLimit;
  const double gap_target = entropic ? opt.entropy_gap_tolerance : opt.tolerance;
  std::vector<double> merit_history;
  int stalls = 0;
  int iter = 0;
  double pres = kInf, dres = kInf, gap = kInf;
  for (; iter < opt.max_iterations; ++iter) {
    compute_residuals();
    const double comp = x.dot(zx) + s.dot(zs) + t.dot(zt);
    const double mu = comp / n_comp;
    const double pobj = objective_of(x);
    pres = std::max(rp.lpNorm<Eigen::Infinity>(), ru.lpNorm<Eigen::Infinity>()) / (1.0 + bnorm);
    dres = std::max(rdx.lpNorm<Eigen::Infinity>(), rds.lpNorm<Eigen::Infinity>()) / (1.0 + cnorm);
    gap = comp / (1.0 + std::abs(pobj));
    const double merit = std::max({pres, dres, gap});
    if (!std::isfinite(merit)) {
      status = IpmStatus::NumericalFailure;
      break;
    }
    if (opt.verbose) {
      std::fprintf(stderr, "it %d pres %.2e dres %.2e gap %.2e mu %.2e\n", iter, pres, dres, gap, mu);
    }
    merit_history.push_back(merit);
    if (merit < best.merit) {
      best = {x, s, t, y, zx, zs, zt, merit, pres, dres, gap};
    }
    if (pres <= opt.tolerance && dres <= opt.tolerance && gap <= gap_target) {
      status = IpmStatus::Optimal;
      break;
    }
    if (iter >= 10 && merit_history[static_cast<std::size_t>(iter - 10)] < 10.0 * merit &&
        best.merit <= opt.loose_tolerance) {
      break; // stalled after reaching acceptable accuracy
    }
    const double xmax = std::max(x.lpNorm<Eigen::Infinity>(), s.lpNorm<Eigen::Infinity>());
    if (xmax > 1e14 || y.lpNorm<Eigen::Infinity>() > 1e14) {
      status = IpmStatus::Infeasible;
      break;
    }

    VectorXd H = hessian(x);
    for (Index j = 0; j < n_cols; ++j) {
      Dx[j] = std::clamp(1.0 / (H[j] + zx[j] / x[j]), 1e-30, 1e30);
    }
    Ds.setZero();
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        double inv = zs[r] / s[r];
        if (boxed[r] > 0.0) {
          inv += zt[r] / t[r];
        }
        Ds[r] = std::clamp(1.0 / inv, 1e-30, 1e30);
      }
    }
    if (!factor(Dx, Ds)) {
      status = IpmStatus::NumericalFailure;
      break;
    }

    // Predictor.
    VectorXd rcx = -x.cwiseProduct(zx);
    VectorXd rcs = -s.cwiseProduct(zs);
    VectorXd rct = -t.cwiseProduct(zt);
    Direction aff = newton(rcx, rcs, rct);
    double ap = std::min({max_step(x, aff.dx, nullptr), max_step(s, aff.ds, &has_slack),
                          max_step(t, aff.dt, &boxed)});
    double ad = std::min({max_step(zx, aff.dzx, nullptr), max_step(zs, aff.dzs, &has_slack),
                          max_step(zt, aff.dzt, &boxed)});
    if (entropic) {
      ap = ad = std::min(ap, ad);
    }
    const double comp_aff = (x + ap * aff.dx).dot(zx + ad * aff.dzx) +
                            (s + ap * aff.ds).dot(zs + ad * aff.dzs) +
                            (t + ap * aff.dt).dot(zt + ad * aff.dzt);
    const double mu_aff = comp_aff / n_comp;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector.
    rcx = (sigma * mu) - x.cwiseProduct(zx).array() - aff.dx.cwiseProduct(aff.dzx).array();
    rcs = ((sigma * mu) - s.cwiseProduct(zs).array() - aff.ds.cwiseProduct(aff.dzs).array())
              .matrix()
              .cwiseProduct(has_slack);
    rct = ((sigma * mu) - t.cwiseProduct(zt).array() - aff.dt.cwiseProduct(aff.dzt).array())
              .matrix()
              .cwiseProduct(boxed);
    Direction d = newton(rcx, rcs, rct);
    ap = std::min({max_step(x, d.dx, nullptr), max_step(s, d.ds, &has_slack),
                   max_step(t, d.dt, &boxed)});
    ad = std::min({max_step(zx, d.dzx, nullptr), max_step(zs, d.dzs, &has_slack),
                   max_step(zt, d.dzt, &boxed)});
    const double eta_step = std::max(0.9, 1.0 - 10.0 * mu);
    ap = std::min(1.0, eta_step * ap);
    ad = std::min(1.0, eta_step * ad);
    if (entropic) {
      ap = ad = std::min(ap, ad);
    }
    if (ap < 1e-10 && ad < 1e-10) {
      if (++stalls >= 5) {
        status = IpmStatus::NumericalFailure;
        break;
      }
    } else {
      stalls = 0;
    }

    x += ap * d.dx;
    s += ap * d.ds.cwiseProduct(has_slack);
    t += ap * d.dt;
    y += ad * d.dy;
    zx += ad * d.dzx;
    zs += ad * d.dzs;
    zt += ad * d.dzt;
    // Keep strictly interior against roundoff.
    for (Index j = 0; j < n_cols; ++j) {
      x[j] = std::max(x[j], 1e-300);
      zx[j] = std::max(zx[j], 1e-300);
    }
    for (Index r = 0; r < R; ++r) {
      if (has_slack[r] > 0.0) {
        s[r] = std::max(s[r], 1e-300);
        zs[r] = std::max(zs[r], 1e-300);
      }
      if (boxed[r] > 0.0) {
        t[r] = std::max(t[r], 1e-300);
        zt[r] = std::max(zt[r], 1e-300);
      }
    }
  }

  if (status != IpmStatus::Optimal && best.merit <= opt.loose_tolerance) {
    status = IpmStatus::Optimal;
  }
  if (status != IpmStatus::Optimal || best.merit < std::max({pres, dres, gap})) {
    if (std::isfinite(best.merit)) {
      x = best.x;
      s = best.s;
      t = best.t;
      y = best.y;
      zx = best.zx;
      zs = best.zs;
      zt = best.zt;
      pres = best.pres;
      dres = best.dres;
      gap = best.gap;
    }
  }

  result.status = status;
  result.iterations = iter;
  result.primal_residual = pres;
  result.dual_residual = dres;
  result.gap = gap;

  // Undo scaling.
  result.x = x.cwiseProduct(col_scale);
  result.reduced_cost = zx.cwiseQuotient(col_scale) / obj_scale;
  double f = prog.cost.dot(result.x);
  if (entropic) {
    for (Index j = 0; j < n_cols; ++j) {
      f += entropy_term(result.x[j], prog.entropy_weight[j], prog.entropy_reference[j]);
    }
  }
  result.objective = f;

  for (Index r = 0; r < R; ++r) {
    const auto k = static_cast<std::size_t>(r);
    double le = 0.0; // multiplier of internal a^T x <= b
    double ge = 0.0; // multiplier of internal a^T x >= b - ub
    if (kind[k] == SlackKind::None) {
      const double yr = y[r] * row_scale[r] / obj_scale;
      le = std::max(-yr, 0.0);
      ge = std::max(yr, 0.0);
    } else {
      le = zs[r] * row_scale[r] / obj_scale;
      if (kind[k] == SlackKind::Boxed) {
        ge = zt[r] * row_scale[r] / obj_scale;
      }
    }
    double upper_mult = le;
    double lower_mult = ge;
    if (orient[k] < 0.0) {
      std::swap(upper_mult, lower_mult);
    }
    const auto& mr = pre.rows[k];
    if (upper_mult != 0.0 && mr.upper_from >= 0) {
      (mr.upper_from_flipped ? result.lambda_lower : result.lambda_upper)[mr.upper_from] +=
          upper_mult;
    }
    if (lower_mult != 0.0 && mr.lower_from >= 0) {
      (mr.lower_from_flipped ? result.lambda_upper : result.lambda_lower)[mr.lower_from] +=
          lower_mult;
    }
  }
  return result;
}

} // namespace rnp::detail
