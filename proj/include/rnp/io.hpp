#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rnp/error.hpp"
#include "rnp/market.hpp"
#include "rnp/polytope.hpp"
#include "rnp/tolerances.hpp"

namespace rnp {

/// Arbitrary payoff vector traded at bid/ask, one value per grid point.
struct CustomQuote {
  std::string label;
  std::vector<double> payoff;
  std::optional<double> bid;
  std::optional<double> ask;
};

struct RejectedRow {
  std::size_t line = 0; // 1-based line in CSV, 1-based entry index in JSON
  std::string raw;
  std::string reason;
};

struct ChainSnapshot {
  std::optional<double> underlying_price;
  std::vector<Quote> quotes;
  std::vector<CustomQuote> custom;
  std::string timestamp;
  std::string expiry;
  std::vector<RejectedRow> rejects;
  std::size_t input_rows = 0;

  std::size_t accepted_rows() const { return quotes.size() + custom.size(); }
};

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;
};

struct RunConfig {
  GridSpec grid;
  FeeSchedule fees;
  double discount_factor = 1.0;
  Tolerances tolerances;

  PriceGrid price_grid() const { return PriceGrid::uniform(grid.min, grid.max, grid.step); }
};

enum class SnapshotFormat { Csv, Json };

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

/// Empty field -> nullopt; anything else must be a finite number.
inline std::optional<double> parse_optional_number(const std::string& field, const char* what) {
  if (field.empty()) {
    return std::nullopt;
  }
  double v = 0.0;
  const char* first = field.data();
  if (*first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw MalformedQuoteError(std::string("cannot parse ") + what + " '" + field + "'");
  }
  return v;
}

inline std::string lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

/// Checks shared by both formats; throws MalformedQuoteError with the reason.
inline void check_sides(const std::optional<double>& bid, const std::optional<double>& ask) {
  if (!bid && !ask) {
    throw MalformedQuoteError("neither bid nor ask present");
  }
  if ((bid && *bid < 0.0) || (ask && *ask < 0.0)) {
    throw MalformedQuoteError("negative price");
  }
  if (bid && ask && *bid > *ask) {
    throw MalformedQuoteError("crossed quote (bid > ask)");
  }
}

inline Quote make_quote(const std::string& kind_name, std::optional<double> strike, std::optional<double> bid,
                        std::optional<double> ask) {
  const auto kind = quote_kind_from_string(lower(kind_name));
  if (!kind) {
    throw MalformedQuoteError("unknown kind '" + kind_name + "'");
  }
  if (*kind != QuoteKind::Underlying && (!strike || !(*strike > 0.0))) {
    throw MalformedQuoteError(std::string(to_string(*kind)) + " needs a positive strike");
  }
  if (*kind == QuoteKind::Underlying) {
    strike.reset();
  }
  check_sides(bid, ask);
  return {*kind, strike, bid, ask};
}

inline void finish(ChainSnapshot& snap) {
  if (snap.accepted_rows() == 0) {
    throw EmptyMarketError("snapshot has no usable quotes (" + std::to_string(snap.rejects.size()) +
                           " rejected)");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path + "'", 0);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::optional<double> json_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) {
    return std::nullopt;
  }
  if (!j[key].is_number()) {
    throw MalformedQuoteError(std::string(key) + " is not a number");
  }
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) {
    throw MalformedQuoteError(std::string(key) + " is not finite");
  }
  return v;
}

} // namespace detail

/// CSV with header `kind,strike,bid,ask` (optionally `label,payoff`, the
/// payoff as `;`-separated values for kind `custom`). Lines `#key=value`
/// set timestamp, expiry or underlying_price; other `#` lines are comments.
inline ChainSnapshot parse_snapshot_csv(const std::string& text) {
  ChainSnapshot snap;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> col;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) {
      continue;
    }
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos) {
        const std::string key = detail::trim(std::string_view(t).substr(1, eq - 1));
        const std::string val = detail::trim(std::string_view(t).substr(eq + 1));
        if (key == "timestamp") {
          snap.timestamp = val;
        } else if (key == "expiry") {
          snap.expiry = val;
        } else if (key == "underlying_price") {
          try {
            snap.underlying_price = detail::parse_optional_number(val, "underlying_price");
          } catch (const MalformedQuoteError& e) {
            throw ParseError(e.what(), lineno);
          }
        }
      }
      continue;
    }
    if (col.empty()) {
      const auto names = detail::split(t, ',');
      for (std::size_t i = 0; i < names.size(); ++i) {
        col[detail::lower(names[i])] = i;
      }
      for (const char* need : {"kind", "strike", "bid", "ask"}) {
        if (!col.count(need)) {
          throw ParseError(std::string("header is missing column '") + need + "'", lineno);
        }
      }
      continue;
    }
    ++snap.input_rows;
    const auto f = detail::split(t, ',');
    try {
      if (f.size() != col.size()) {
        throw MalformedQuoteError("expected " + std::to_string(col.size()) + " fields, got " +
                                  std::to_string(f.size()));
      }
      const auto bid = detail::parse_optional_number(f[col["bid"]], "bid");
      const auto ask = detail::parse_optional_number(f[col["ask"]], "ask");
      if (detail::lower(f[col["kind"]]) == "custom") {
        if (!col.count("payoff")) {
          throw MalformedQuoteError("custom row needs a payoff column");
        }
        CustomQuote cq;
        cq.label = col.count("label") ? f[col["label"]] : std::string();
        for (const auto& v : detail::split(f[col["payoff"]], ';')) {
          const auto x = detail::parse_optional_number(v, "payoff");
          if (!x) {
            throw MalformedQuoteError("empty payoff entry");
          }
          cq.payoff.push_back(*x);
        }
        detail::check_sides(bid, ask);
        cq.bid = bid;
        cq.ask = ask;
        snap.custom.push_back(std::move(cq));
      } else {
        snap.quotes.push_back(
            detail::make_quote(f[col["kind"]], detail::parse_optional_number(f[col["strike"]], "strike"), bid, ask));
      }
    } catch (const MalformedQuoteError& e) {
      snap.rejects.push_back({lineno, t, e.what()});
    }
  }
  if (col.empty()) {
    throw ParseError("no header line", lineno);
  }
  detail::finish(snap);
  return snap;
}

/// `{"timestamp", "expiry", "underlying_price", "quotes": [{kind, strike,
/// bid, ask, label?, payoff?}]}`.
inline ChainSnapshot parse_snapshot_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(e.what(), line);
  }
  if (!doc.is_object() || !doc.contains("quotes") || !doc["quotes"].is_array()) {
    throw ParseError("expected an object with a 'quotes' array", 1);
  }
  ChainSnapshot snap;
  snap.timestamp = doc.value("timestamp", "");
  snap.expiry = doc.value("expiry", "");
  if (doc.contains("underlying_price") && doc["underlying_price"].is_number()) {
    snap.underlying_price = doc["underlying_price"].get<double>();
  }
  std::size_t idx = 0;
  for (const auto& q : doc["quotes"]) {
    ++idx;
    ++snap.input_rows;
    try {
      if (!q.is_object() || !q.contains("kind") || !q["kind"].is_string()) {
        throw MalformedQuoteError("entry needs a string 'kind'");
      }
      const auto bid = detail::json_number(q, "bid");
      const auto ask = detail::json_number(q, "ask");
      const std::string kind = q["kind"].get<std::string>();
      if (detail::lower(kind) == "custom") {
        if (!q.contains("payoff") || !q["payoff"].is_array()) {
          throw MalformedQuoteError("custom entry needs a payoff array");
        }
        CustomQuote cq;
        cq.label = q.value("label", "");
        for (const auto& v : q["payoff"]) {
          if (!v.is_number()) {
            throw MalformedQuoteError("payoff entries must be numbers");
          }
          cq.payoff.push_back(v.get<double>());
        }
        detail::check_sides(bid, ask);
        cq.bid = bid;
        cq.ask = ask;
        snap.custom.push_back(std::move(cq));
      } else {
        snap.quotes.push_back(detail::make_quote(kind, detail::json_number(q, "strike"), bid, ask));
      }
    } catch (const MalformedQuoteError& e) {
      snap.rejects.push_back({idx, q.dump(), e.what()});
    }
  }
  detail::finish(snap);
  return snap;
}

inline ChainSnapshot load_snapshot(const std::string& path, SnapshotFormat format) {
  const std::string text = detail::read_file(path);
  return format == SnapshotFormat::Csv ? parse_snapshot_csv(text) : parse_snapshot_json(text);
}

/// Format from the file extension; anything but `.json` is read as CSV.
inline ChainSnapshot load_snapshot(const std::string& path) {
  const bool json = path.size() >= 5 && detail::lower(path.substr(path.size() - 5)) == ".json";
  return load_snapshot(path, json ? SnapshotFormat::Json : SnapshotFormat::Csv);
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"grid", {{"min", c.grid.min}, {"max", c.grid.max}, {"step", c.grid.step}}},
          {"fees",
           {{"option_fixed_fee", c.fees.option_fixed_fee},
            {"option_proportional_fee", c.fees.option_proportional_fee},
            {"underlying_proportional_fee", c.fees.underlying_proportional_fee},
            {"future_buy_fee", c.fees.future_buy_fee},
            {"future_sell_rebate", c.fees.future_sell_rebate}}},
          {"discount_factor", c.discount_factor},
          {"tolerances",
           {{"feas", c.tolerances.feas},
            {"arb", c.tolerances.arb},
            {"opt", c.tolerances.opt},
            {"cs", c.tolerances.cs},
            {"simplex", c.tolerances.simplex}}}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    const auto& g = j.at("grid");
    c.grid = {g.at("min").get<double>(), g.at("max").get<double>(), g.at("step").get<double>()};
    if (j.contains("fees")) {
      const auto& f = j["fees"];
      c.fees.option_fixed_fee = f.value("option_fixed_fee", 0.0);
      c.fees.option_proportional_fee = f.value("option_proportional_fee", 0.0);
      c.fees.underlying_proportional_fee = f.value("underlying_proportional_fee", 0.0);
      c.fees.future_buy_fee = f.value("future_buy_fee", 0.0);
      c.fees.future_sell_rebate = f.value("future_sell_rebate", 0.0);
    }
    c.discount_factor = j.value("discount_factor", 1.0);
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      c.tolerances.feas = t.value("feas", c.tolerances.feas);
      c.tolerances.arb = t.value("arb", c.tolerances.arb);
      c.tolerances.opt = t.value("opt", c.tolerances.opt);
      c.tolerances.cs = t.value("cs", c.tolerances.cs);
      c.tolerances.simplex = t.value("simplex", c.tolerances.simplex);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(std::string("bad config: ") + e.what());
  }
  if (!(c.grid.min > 0.0) || !(c.grid.step > 0.0) || !(c.grid.max > c.grid.min)) {
    throw InvalidArgumentError("config grid needs min > 0, step > 0 and max > min");
  }
  c.fees.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  const std::string text = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), 1 + static_cast<std::size_t>(std::count(
                                       text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(e.byte, text.size())), '\n')));
  }
  return config_from_json(j);
}

struct BuiltMarket {
  Market market;
  RiskNeutralSet set;
};

/// Expands every quote into its buy/sell investments and builds Pi.
inline BuiltMarket build_market(const ChainSnapshot& snap, const RunConfig& config) {
  const PriceGrid grid = config.price_grid();
  std::vector<Investment> inv;
  for (const auto& q : snap.quotes) {
    for (auto& i : quote_to_investments(q, config.fees)) {
      inv.push_back(std::move(i));
    }
  }
  for (const auto& cq : snap.custom) {
    if (cq.payoff.size() != grid.size()) {
      throw InvalidInstrumentError("custom payoff '" + cq.label + "' has " + std::to_string(cq.payoff.size()) +
                                   " values for a grid of " + std::to_string(grid.size()));
    }
    if (cq.ask) {
      inv.push_back({{InstrumentKind::CustomPayoff, std::nullopt, cq.payoff, cq.label}, *cq.ask});
    }
    if (cq.bid) {
      std::vector<double> neg(cq.payoff);
      for (double& v : neg) {
        v = -v;
      }
      inv.push_back({{InstrumentKind::CustomPayoff, std::nullopt, neg, "-" + cq.label}, -*cq.bid});
    }
  }
  Market market = Market::from_investments(grid, inv, config.discount_factor);
  RiskNeutralSet set(market, config.tolerances);
  return {std::move(market), std::move(set)};
}

inline nlohmann::json to_json(const Market& market) {
  nlohmann::json instr = nlohmann::json::array();
  for (std::size_t j = 0; j < market.num_investments(); ++j) {
    const auto& in = market.instruments()[j];
    nlohmann::json e{{"kind", std::string(to_string(in.kind))}, {"label", in.label}, {"cost", market.costs()[j]}};
    e["strike"] = in.strike ? nlohmann::json(*in.strike) : nlohmann::json(nullptr);
    if (in.kind == InstrumentKind::CustomPayoff) {
      e["payoff"] = in.payoff_vector;
    }
    instr.push_back(std::move(e));
  }
  return {{"grid", market.grid().values()}, {"discount_factor", market.discount_factor()}, {"instruments", instr}};
}

inline Market market_from_json(const nlohmann::json& j) {
  try {
    std::vector<Instrument> instr;
    std::vector<double> costs;
    for (const auto& e : j.at("instruments")) {
      Instrument in;
      in.kind = instrument_kind_from_string(e.at("kind").get<std::string>());
      if (e.contains("strike") && !e["strike"].is_null()) {
        in.strike = e["strike"].get<double>();
      }
      if (e.contains("payoff")) {
        in.payoff_vector = e["payoff"].get<std::vector<double>>();
      }
      in.label = e.value("label", "");
      instr.push_back(std::move(in));
      costs.push_back(e.at("cost").get<double>());
    }
    return Market(PriceGrid(j.at("grid").get<std::vector<double>>()), std::move(instr), std::move(costs),
                  j.value("discount_factor", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad market document: ") + e.what(), 0);
  }
}

} // namespace rnp
