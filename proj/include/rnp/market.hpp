#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rnp/error.hpp"

namespace rnp {

/// Discretized expiration prices p_1 < ... < p_m, all positive.
class PriceGrid {
public:
  explicit PriceGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw InvalidArgumentError("price grid must contain at least one value");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
        throw InvalidArgumentError("price grid values must be finite and positive");
      }
      if (i > 0 && !(values_[i - 1] < values_[i])) {
        throw InvalidArgumentError("price grid must be strictly increasing");
      }
    }
  }

  /// min, min + step, ... with m = floor((max - min) / step) + 1 points.
  static PriceGrid uniform(double min, double max, double step) {
    if (!(min > 0.0) || !(step > 0.0) || !(max > min)) {
      throw InvalidArgumentError("uniform grid requires min > 0, step > 0, max > min");
    }
    // Absorb representation error so that e.g. (4000 - 1500) / 0.5 counts 5000 steps.
    const double steps = (max - min) / step;
    const auto count = static_cast<std::size_t>(std::floor(steps + 1e-9 * std::max(1.0, steps))) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = min + static_cast<double>(i) * step;
    }
    return PriceGrid(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }
  const std::vector<double>& values() const noexcept { return values_; }

  Eigen::Map<const Eigen::VectorXd> vector() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  friend bool operator==(const PriceGrid&, const PriceGrid&) = default;

private:
  std::vector<double> values_;
};

enum class InstrumentKind {
  UnderlyingLong,
  UnderlyingShort,
  CallBuy,
  CallWrite,
  PutBuy,
  PutWrite,
  FutureLong,
  FutureShort,
  BinaryAboveBuy,
  BinaryAboveSell,
  CustomPayoff,
};

inline constexpr std::string_view to_string(InstrumentKind kind) {
  switch (kind) {
  case InstrumentKind::UnderlyingLong: return "UnderlyingLong";
  case InstrumentKind::UnderlyingShort: return "UnderlyingShort";
  case InstrumentKind::CallBuy: return "CallBuy";
  case InstrumentKind::CallWrite: return "CallWrite";
  case InstrumentKind::PutBuy: return "PutBuy";
  case InstrumentKind::PutWrite: return "PutWrite";
  case InstrumentKind::FutureLong: return "FutureLong";
  case InstrumentKind::FutureShort: return "FutureShort";
  case InstrumentKind::BinaryAboveBuy: return "BinaryAboveBuy";
  case InstrumentKind::BinaryAboveSell: return "BinaryAboveSell";
  case InstrumentKind::CustomPayoff: return "CustomPayoff";
  }
  return "?";
}

inline InstrumentKind instrument_kind_from_string(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(InstrumentKind::CustomPayoff); ++k) {
    const auto kind = static_cast<InstrumentKind>(k);
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw InvalidInstrumentError("unknown instrument kind '" + std::string(name) + "'");
}

inline constexpr bool requires_strike(InstrumentKind kind) {
  return kind != InstrumentKind::UnderlyingLong && kind != InstrumentKind::UnderlyingShort &&
         kind != InstrumentKind::CustomPayoff;
}

/// A payoff function held in nonnegative quantity.
struct Instrument {
  InstrumentKind kind = InstrumentKind::UnderlyingLong;
  std::optional<double> strike;
  /// Only for CustomPayoff: payoff on each grid point.
  std::vector<double> payoff_vector;
  std::string label;

  void validate() const {
    if (requires_strike(kind)) {
      if (!strike) {
        throw InvalidInstrumentError(std::string(to_string(kind)) + " requires a strike");
      }
      if (!(*strike > 0.0) || !std::isfinite(*strike)) {
        throw InvalidInstrumentError(std::string(to_string(kind)) + " strike must be positive");
      }
    }
    if (kind == InstrumentKind::CustomPayoff && payoff_vector.empty()) {
      throw InvalidInstrumentError("CustomPayoff requires a payoff vector");
    }
  }

  /// Human readable name used in reports when no label was supplied.
  std::string display_name() const {
    if (!label.empty()) {
      return label;
    }
    std::ostringstream os;
    auto strike_text = [&] {
      std::ostringstream s;
      s << (strike ? *strike : 0.0);
      return s.str();
    };
    switch (kind) {
    case InstrumentKind::UnderlyingLong: os << "Long underlying"; break;
    case InstrumentKind::UnderlyingShort: os << "Short underlying"; break;
    case InstrumentKind::CallBuy: os << "Buy " << strike_text() << " call"; break;
    case InstrumentKind::CallWrite: os << "Write " << strike_text() << " call"; break;
    case InstrumentKind::PutBuy: os << "Buy " << strike_text() << " put"; break;
    case InstrumentKind::PutWrite: os << "Write " << strike_text() << " put"; break;
    case InstrumentKind::FutureLong: os << "Long future @" << strike_text(); break;
    case InstrumentKind::FutureShort: os << "Short future @" << strike_text(); break;
    case InstrumentKind::BinaryAboveBuy: os << "Buy " << strike_text() << " binary"; break;
    case InstrumentKind::BinaryAboveSell: os << "Sell " << strike_text() << " binary"; break;
    case InstrumentKind::CustomPayoff: os << "Custom payoff"; break;
    }
    return os.str();
  }

  friend bool operator==(const Instrument&, const Instrument&) = default;
};

/// Dollar payoff per unit of `instr` when the underlying expires at `p`.
inline double payoff(const Instrument& instr, double p) {
  if (!(p > 0.0)) {
    throw InvalidArgumentError("expiration price must be positive");
  }
  instr.validate();
  const double s = instr.strike.value_or(0.0);
  switch (instr.kind) {
  case InstrumentKind::UnderlyingLong: return p;
  case InstrumentKind::UnderlyingShort: return -p;
  case InstrumentKind::CallBuy: return std::max(p - s, 0.0);
  case InstrumentKind::CallWrite: return -std::max(p - s, 0.0);
  case InstrumentKind::PutBuy: return std::max(s - p, 0.0);
  case InstrumentKind::PutWrite: return -std::max(s - p, 0.0);
  case InstrumentKind::FutureLong: return p - s;
  case InstrumentKind::FutureShort: return s - p;
  case InstrumentKind::BinaryAboveBuy: return p >= s ? 1.0 : 0.0;
  case InstrumentKind::BinaryAboveSell: return p >= s ? -1.0 : 0.0;
  case InstrumentKind::CustomPayoff:
    throw InvalidInstrumentError("CustomPayoff is only defined on its price grid");
  }
  throw InvalidInstrumentError("unknown instrument kind");
}

/// Payoff of `instr` on every grid point, scaled by `discount`.
inline Eigen::VectorXd payoff_column(const Instrument& instr, const PriceGrid& grid,
                                     double discount = 1.0) {
  instr.validate();
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd col(m);
  if (instr.kind == InstrumentKind::CustomPayoff) {
    if (instr.payoff_vector.size() != grid.size()) {
      throw InvalidInstrumentError("CustomPayoff vector has length " +
                                   std::to_string(instr.payoff_vector.size()) +
                                   " but the grid has " + std::to_string(grid.size()) +
                                   " points");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      col[i] = discount * instr.payoff_vector[static_cast<std::size_t>(i)];
    }
    return col;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    col[i] = discount * payoff(instr, grid[static_cast<std::size_t>(i)]);
  }
  return col;
}

struct FeeSchedule {
  /// Currency per option contract, charged on either side.
  double option_fixed_fee = 0.0;
  /// Fraction of the option premium.
  double option_proportional_fee = 0.0;
  /// Fraction of the underlying price.
  double underlying_proportional_fee = 0.0;
  /// Fraction of the futures notional, charged when buying.
  double future_buy_fee = 0.0;
  /// Fraction of the futures notional, credited when selling.
  double future_sell_rebate = 0.0;

  void validate() const {
    for (double f : {option_fixed_fee, option_proportional_fee, underlying_proportional_fee,
                     future_buy_fee, future_sell_rebate}) {
      if (!(f >= 0.0) || !std::isfinite(f)) {
        throw InvalidArgumentError("fee schedule entries must be finite and nonnegative");
      }
    }
  }

  friend bool operator==(const FeeSchedule&, const FeeSchedule&) = default;
};

enum class QuoteKind { Call, Put, Future, Underlying, Binary };

inline constexpr std::string_view to_string(QuoteKind kind) {
  switch (kind) {
  case QuoteKind::Call: return "call";
  case QuoteKind::Put: return "put";
  case QuoteKind::Future: return "future";
  case QuoteKind::Underlying: return "underlying";
  case QuoteKind::Binary: return "binary";
  }
  return "?";
}

inline std::optional<QuoteKind> quote_kind_from_string(std::string_view name) {
  for (auto k : {QuoteKind::Call, QuoteKind::Put, QuoteKind::Future, QuoteKind::Underlying,
                 QuoteKind::Binary}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

/// Top of book for one contract. Absent sides are not tradable.
struct Quote {
  QuoteKind kind = QuoteKind::Call;
  std::optional<double> strike;
  std::optional<double> bid;
  std::optional<double> ask;

  friend bool operator==(const Quote&, const Quote&) = default;
};

struct Investment {
  Instrument instrument;
  double cost = 0.0;
};

/// Expands a quote into the investments it makes available (buy side first).
///
/// Options and binaries pay ask plus fees to buy and receive bid minus fees to
/// sell. The underlying carries a proportional fee only. A future entered at
/// price F is the payoff p - F (or F - p) whose upfront cost is the fee (or
/// minus the rebate) on the notional F; on the simplex this is the same
/// constraint as holding the underlying for F plus fees.
inline std::vector<Investment> quote_to_investments(const Quote& quote, const FeeSchedule& fees) {
  fees.validate();
  if ((quote.bid && !(*quote.bid >= 0.0)) || (quote.ask && !(*quote.ask >= 0.0)) ||
      (quote.bid && !std::isfinite(*quote.bid)) || (quote.ask && !std::isfinite(*quote.ask))) {
    throw MalformedQuoteError("bid and ask must be finite and nonnegative");
  }
  const bool emit_buy = quote.ask && (!quote.bid || *quote.ask >= *quote.bid);
  const bool emit_sell = quote.bid.has_value();

  std::vector<Investment> out;
  auto add = [&](InstrumentKind kind, std::optional<double> strike, double cost) {
    Instrument instr{kind, strike, {}, {}};
    instr.label = instr.display_name();
    out.push_back({std::move(instr), cost});
  };

  switch (quote.kind) {
  case QuoteKind::Call:
  case QuoteKind::Put:
  case QuoteKind::Binary: {
    if (!quote.strike || !(*quote.strike > 0.0)) {
      throw MalformedQuoteError(std::string(to_string(quote.kind)) +
                                " quote requires a positive strike");
    }
    InstrumentKind buy = InstrumentKind::CallBuy;
    InstrumentKind sell = InstrumentKind::CallWrite;
    if (quote.kind == QuoteKind::Put) {
      buy = InstrumentKind::PutBuy;
      sell = InstrumentKind::PutWrite;
    } else if (quote.kind == QuoteKind::Binary) {
      buy = InstrumentKind::BinaryAboveBuy;
      sell = InstrumentKind::BinaryAboveSell;
    }
    if (emit_buy) {
      const double a = *quote.ask;
      add(buy, quote.strike, a + fees.option_fixed_fee + fees.option_proportional_fee * a);
    }
    if (emit_sell) {
      const double b = *quote.bid;
      add(sell, quote.strike, -b + fees.option_fixed_fee + fees.option_proportional_fee * b);
    }
    break;
  }
  case QuoteKind::Underlying: {
    if (emit_buy) {
      const double a = *quote.ask;
      add(InstrumentKind::UnderlyingLong, std::nullopt, a + fees.underlying_proportional_fee * a);
    }
    if (emit_sell) {
      const double b = *quote.bid;
      add(InstrumentKind::UnderlyingShort, std::nullopt,
          -b + fees.underlying_proportional_fee * b);
    }
    break;
  }
  case QuoteKind::Future: {
    if ((emit_buy && !(*quote.ask > 0.0)) || (emit_sell && !(*quote.bid > 0.0))) {
      throw MalformedQuoteError("futures prices must be positive");
    }
    if (emit_buy) {
      const double a = *quote.ask;
      add(InstrumentKind::FutureLong, a, fees.future_buy_fee * a);
    }
    if (emit_sell) {
      const double b = *quote.bid;
      add(InstrumentKind::FutureShort, b, -fees.future_sell_rebate * b);
    }
    break;
  }
  }
  return out;
}

/// Instruments, their costs and the outcome grid. Owns the payoff matrix
/// P (m x n) with P(i, j) = discount * f_j(p_i).
class Market {
public:
  Market(PriceGrid grid, std::vector<Instrument> instruments, std::vector<double> costs,
         double discount_factor = 1.0)
      : grid_(std::move(grid)), instruments_(std::move(instruments)), costs_(std::move(costs)),
        discount_factor_(discount_factor) {
    if (instruments_.size() != costs_.size()) {
      throw InvalidArgumentError("market needs one cost per instrument");
    }
    if (!(discount_factor_ > 0.0) || !std::isfinite(discount_factor_)) {
      throw InvalidArgumentError("discount factor must be finite and positive");
    }
    for (double c : costs_) {
      if (!std::isfinite(c)) {
        throw InvalidArgumentError("costs must be finite");
      }
    }
    const auto m = static_cast<Eigen::Index>(grid_.size());
    const auto n = static_cast<Eigen::Index>(instruments_.size());
    payoffs_.resize(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      payoffs_.col(j) = payoff_column(instruments_[static_cast<std::size_t>(j)], grid_,
                                      discount_factor_);
    }
  }

  static Market from_investments(PriceGrid grid, std::span<const Investment> investments,
                                 double discount_factor = 1.0) {
    std::vector<Instrument> instruments;
    std::vector<double> costs;
    instruments.reserve(investments.size());
    costs.reserve(investments.size());
    for (const auto& inv : investments) {
      instruments.push_back(inv.instrument);
      costs.push_back(inv.cost);
    }
    return Market(std::move(grid), std::move(instruments), std::move(costs), discount_factor);
  }

  const PriceGrid& grid() const noexcept { return grid_; }
  const std::vector<Instrument>& instruments() const noexcept { return instruments_; }
  const std::vector<double>& costs() const noexcept { return costs_; }
  double discount_factor() const noexcept { return discount_factor_; }
  std::size_t num_outcomes() const noexcept { return grid_.size(); }
  std::size_t num_investments() const noexcept { return instruments_.size(); }

  const Eigen::MatrixXd& payoff_matrix() const noexcept { return payoffs_; }
  Eigen::Map<const Eigen::VectorXd> cost_vector() const {
    return {costs_.data(), static_cast<Eigen::Index>(costs_.size())};
  }

private:
  PriceGrid grid_;
  std::vector<Instrument> instruments_;
  std::vector<double> costs_;
  double discount_factor_;
  Eigen::MatrixXd payoffs_;
};

/// Recomputes P from the market's instruments.
inline Eigen::MatrixXd build_payoff_matrix(const Market& market) {
  const auto m = static_cast<Eigen::Index>(market.num_outcomes());
  const auto n = static_cast<Eigen::Index>(market.num_investments());
  Eigen::MatrixXd p(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    p.col(j) = payoff_column(market.instruments()[static_cast<std::size_t>(j)], market.grid(),
                             market.discount_factor());
  }
  return p;
}

} // namespace rnp
