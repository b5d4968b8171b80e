#pragma once

namespace rnp {

/// Numerical thresholds shared by every query.
///
/// `feas` bounds constraint residuals. It is applied relative to the scale of
/// the row being checked, i.e. a residual r on row a^T pi <= b passes when
/// r <= feas * (1 + |b| + max|a|). `arb` is the worst-case return a portfolio
/// must exceed before it is reported as an arbitrage.
struct Tolerances {
  double feas = 1e-8;
  double arb = 1e-6;
  double opt = 1e-7;
  double cs = 1e-6;
  double simplex = 1e-9;
};

} // namespace rnp
