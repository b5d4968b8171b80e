#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "rnp/analysis.hpp"
#include "rnp/arbitrage.hpp"
#include "rnp/estimate.hpp"
#include "rnp/io.hpp"

namespace rnp::cli {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string snapshot;
  std::string config;
  std::string out_dir = ".";
  std::string format;
  std::vector<double> eps;
  std::size_t points = 0;
  std::string function = "price";
  std::string numerator;
  std::string denominator;
  std::string payoff;
  bool ccdf = false;
  std::string reference;
  double ref_mu = std::numeric_limits<double>::quiet_NaN();
  double ref_sigma = std::numeric_limits<double>::quiet_NaN();
  int max_iters = 50;
  double tol_div = 1e-6;
  int starts = 4;
  std::uint64_t seed = 20190101;
  double days = 0.0;
  double day_count = 365.0;
  bool entropy = false;
  bool maximize = false;
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path + "'", 0);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const Distribution& d) { return std::vector<double>(d.probs().data(), d.probs().data() + d.size()); }

double parse_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("bad number '" + s + "' in function spec '" + spec + "'");
  }
}

/// Reference distribution from a file: one probability per line, or
/// comma-separated rows whose last field is the probability. A non-numeric
/// first line is taken as a header.
Eigen::VectorXd read_reference(const std::string& path) {
  std::istringstream in(read_bytes(path));
  std::vector<double> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = detail::split(line, ',');
    const std::string last = fields.back();
    if (last.empty() || last[0] == '#') {
      continue;
    }
    try {
      std::size_t used = 0;
      v.push_back(std::stod(last, &used));
      if (used != last.size()) {
        throw std::invalid_argument(last);
      }
    } catch (const std::logic_error&) {
      if (v.empty() && lineno == 1) {
        continue;
      }
      throw ParseError("bad probability '" + last + "'", lineno);
    }
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class Writer {
public:
  Writer(std::string dir, std::string name) : dir_(std::move(dir)), name_(std::move(name)) {
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& ext) const {
    return (std::filesystem::path(dir_) / (name_ + ext)).string();
  }

  void json_doc(const json& doc) const {
    std::ofstream f(path(".json"));
    f << doc.dump(2) << '\n';
    if (!f) {
      throw Error("cannot write " + path(".json"));
    }
  }

  /// CSV with a header row; values at 12 significant digits.
  void csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
           const std::string& suffix = "") const {
    std::ofstream f(path(suffix + ".csv"));
    for (std::size_t i = 0; i < header.size(); ++i) {
      f << (i ? "," : "") << header[i];
    }
    f << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        f << (i ? "," : "") << r[i];
      }
      f << '\n';
    }
    if (!f) {
      throw Error("cannot write " + path(suffix + ".csv"));
    }
  }

private:
  std::string dir_;
  std::string name_;
};

std::string num(double v) {
  if (std::isnan(v)) {
    return "";
  }
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

std::vector<std::vector<std::string>> distribution_rows(const PriceGrid& grid, const Distribution& pi) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back({num(grid[i]), num(pi[i])});
  }
  return rows;
}

void add_common(CLI::App* sc, Options& o) {
  sc->add_option("--snapshot", o.snapshot, "Quote snapshot (csv or json)")->required();
  sc->add_option("--config", o.config, "Run configuration (json)")->required();
  sc->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  sc->add_option("--format", o.format, "Snapshot format")->check(CLI::IsMember({"csv", "json"}));
}

void add_function(CLI::App* sc, std::string& target, const char* flag, const char* help) {
  sc->add_option(flag, target, help)->capture_default_str();
}

std::unique_ptr<CLI::App> make_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Bounds on risk-neutral probabilities from option quotes", "rnp");
  app->require_subcommand(1, 1);
  const std::string fn_help = "price, log, const:C, power:A, call:K, put:K, binary:K or indicator:LO:HI";

  auto* check = app->add_subcommand("check", "Detect arbitrage; exit 2 when found");
  add_common(check, o);

  auto* ex = app->add_subcommand("expectation", "Bounds on E g(p)");
  add_common(ex, o);
  add_function(ex, o.function, "--function", fn_help.c_str());

  auto* ratio = app->add_subcommand("ratio", "Bounds on E f(p) / E g(p)");
  add_common(ratio, o);
  ratio->add_option("--numerator", o.numerator, fn_help)->required();
  ratio->add_option("--denominator", o.denominator, fn_help)->required();

  auto* cdf = app->add_subcommand("cdf", "Bounds on P(g(p) <= x) at each evaluation point");
  add_common(cdf, o);
  add_function(cdf, o.function, "--function", fn_help.c_str());
  cdf->add_option("--points", o.points, "Number of evaluation points (default: distinct values, at most 500)");
  cdf->add_flag("--ccdf", o.ccdf, "Bound P(g(p) >= x) instead");

  auto* var = app->add_subcommand("var", "Bounds on the eps-quantile of g(p)");
  add_common(var, o);
  add_function(var, o.function, "--function", fn_help.c_str());
  var->add_option("--eps", o.eps, "Probability level(s); default 0.05, 0.10, ..., 0.95")
      ->check(CLI::Range(0.0, 1.0));

  auto* cvar = app->add_subcommand("cvar", "Upper bound on the eps tail mean of g(p)");
  add_common(cvar, o);
  add_function(cvar, o.function, "--function", fn_help.c_str());
  cvar->add_option("--eps", o.eps, "Probability level(s); default 0.05")->check(CLI::Range(0.0, 1.0));

  auto* pb = app->add_subcommand("price-bounds", "No-arbitrage price range of a new payoff");
  add_common(pb, o);
  pb->add_option("--payoff", o.payoff, fn_help)->required();

  auto* ho = app->add_subcommand("holdout", "Bound each quoted option from the rest of the chain");
  add_common(ho, o);

  auto* me = app->add_subcommand("maxent", "Maximum entropy member of the risk-neutral set");
  add_common(me, o);

  auto* kl = app->add_subcommand("kl-project", "KL projection of a reference distribution");
  add_common(kl, o);
  kl->add_option("--reference", o.reference, "File with one probability per grid point");
  kl->add_option("--ref-mu", o.ref_mu, "Log-normal reference: mean of log p");
  kl->add_option("--ref-sigma", o.ref_sigma, "Log-normal reference: std of log p");

  auto* ln = app->add_subcommand("lognormal", "Approximately closest log-normal member");
  add_common(ln, o);
  ln->add_option("--max-iters", o.max_iters)->capture_default_str()->check(CLI::PositiveNumber);
  ln->add_option("--tol-div", o.tol_div)->capture_default_str()->check(CLI::NonNegativeNumber);
  ln->add_option("--starts", o.starts, "Random starting points besides maxent")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  ln->add_option("--seed", o.seed)->capture_default_str();
  ln->add_option("--days", o.days, "Days to expiry, for annualized volatility")->check(CLI::PositiveNumber);
  ln->add_option("--day-count", o.day_count)->capture_default_str()->check(CLI::PositiveNumber);

  auto* se = app->add_subcommand("sensitivity", "Dual prices of every investment");
  add_common(se, o);
  se->add_option("--objective", o.function, fn_help)->capture_default_str();
  se->add_flag("--entropy", o.entropy, "Use the maximum entropy objective");
  se->add_flag("--maximize", o.maximize, "Maximize the linear objective");
  return app;
}

json options_json(const std::string& name, const Options& o) {
  json j{{"subcommand", name}};
  if (name == "expectation" || name == "cdf" || name == "var" || name == "cvar") {
    j["function"] = o.function;
  }
  if (name == "ratio") {
    j["numerator"] = o.numerator;
    j["denominator"] = o.denominator;
  }
  if (name == "cdf") {
    j["points"] = o.points;
    j["ccdf"] = o.ccdf;
  }
  if (name == "var" || name == "cvar") {
    j["eps"] = o.eps;
  }
  if (name == "price-bounds") {
    j["payoff"] = o.payoff;
  }
  if (name == "kl-project") {
    j["reference"] = o.reference;
    j["ref_mu"] = std::isnan(o.ref_mu) ? json(nullptr) : json(o.ref_mu);
    j["ref_sigma"] = std::isnan(o.ref_sigma) ? json(nullptr) : json(o.ref_sigma);
  }
  if (name == "lognormal") {
    j.update({{"max_iters", o.max_iters},
              {"tol_div", o.tol_div},
              {"starts", o.starts},
              {"seed", o.seed},
              {"days", o.days},
              {"day_count", o.day_count}});
  }
  if (name == "sensitivity") {
    j.update({{"objective", o.entropy ? "entropy" : o.function}, {"maximize", o.maximize}});
  }
  return j;
}

int execute(const std::string& name, const Options& o, std::ostream& out) {
  const std::string snap_bytes = read_bytes(o.snapshot);
  const std::string cfg_bytes = read_bytes(o.config);
  ChainSnapshot snap = o.format.empty()
                           ? load_snapshot(o.snapshot)
                           : load_snapshot(o.snapshot, o.format == "json" ? SnapshotFormat::Json : SnapshotFormat::Csv);
  const RunConfig config = load_config(o.config);
  SolverOptions solver;
  if (const char* v = std::getenv("RNP_VERBOSE"); v && *v && std::string(v) != "0") {
    solver.ipm.verbose = true;
  }

  const json opts = options_json(name, o);
  const std::string snap_sha = sha256_hex(snap_bytes);
  const std::string cfg_sha = sha256_hex(cfg_bytes);
  json doc{{"subcommand", name},
           {"options", opts},
           {"config", rnp::to_json(config)},
           {"inputs",
            {{"snapshot", o.snapshot},
             {"config", o.config},
             {"snapshot_sha256", snap_sha},
             {"config_sha256", cfg_sha},
             {"digest", sha256_hex(snap_sha + cfg_sha + opts.dump())}}}};
  json rejects = json::array();
  for (const auto& r : snap.rejects) {
    rejects.push_back({{"line", r.line}, {"raw", r.raw}, {"reason", r.reason}});
  }
  doc["snapshot"] = {{"timestamp", snap.timestamp},
                     {"expiry", snap.expiry},
                     {"input_rows", snap.input_rows},
                     {"accepted_rows", snap.accepted_rows()},
                     {"rejects", rejects}};
  const Writer writer(o.out_dir, name);
  const PriceGrid grid = config.price_grid();
  int code = kExitOk;
  json result;

  if (name == "holdout") {
    const auto rows = holdout_validate(snap.quotes, config.fees, grid, config.discount_factor, config.tolerances,
                                       solver);
    std::vector<std::vector<std::string>> csv;
    json arr = json::array();
    int violations = 0;
    for (const auto& r : rows) {
      violations += r.violation ? 1 : 0;
      const auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
      csv.push_back({r.label, std::string(to_string(r.kind)), opt(r.strike), opt(r.true_bid), opt(r.true_ask),
                     num(r.lower), num(r.upper), r.feasible ? "1" : "0", r.violation ? "1" : "0"});
      arr.push_back({{"label", r.label},
                     {"kind", std::string(to_string(r.kind))},
                     {"strike", r.strike ? json(*r.strike) : json(nullptr)},
                     {"bid", r.true_bid ? json(*r.true_bid) : json(nullptr)},
                     {"ask", r.true_ask ? json(*r.true_ask) : json(nullptr)},
                     {"lower", r.lower},
                     {"upper", r.upper},
                     {"feasible", r.feasible},
                     {"violation", r.violation},
                     {"message", r.message}});
    }
    writer.csv({"label", "kind", "strike", "bid", "ask", "lower", "upper", "feasible", "violation"}, csv);
    result = {{"rows", arr}, {"violations", violations}, {"csv", writer.path(".csv")}};
    out << "holdout: " << rows.size() << " options, " << violations << " violations\n";
  } else {
    const BuiltMarket built = build_market(snap, config);
    const RiskNeutralSet& set = built.set;
    doc["market"] = {{"outcomes", built.market.num_outcomes()}, {"investments", built.market.num_investments()}};

    if (name == "check") {
      const auto res = check_arbitrage(set, solver);
      if (const auto* a = std::get_if<Arbitrage>(&res)) {
        json w = json::array();
        for (std::size_t j = 0; j < built.market.num_investments(); ++j) {
          const double wj = j < static_cast<std::size_t>(a->certificate.weights.size())
                                ? a->certificate.weights[static_cast<Eigen::Index>(j)]
                                : 0.0;
          w.push_back({{"label", built.market.instruments()[j].label}, {"weight", wj}});
        }
        result = {{"arbitrage", true},
                  {"certificate",
                   {{"weights", w},
                    {"guaranteed_return", a->certificate.guaranteed_return},
                    {"verified", verify_certificate(set, a->certificate)}}}};
        code = kExitArbitrage;
        out << "arbitrage: guaranteed return " << num(a->certificate.guaranteed_return) << "\n";
      } else {
        const auto& pi = std::get<NoArbitrage>(res).pi;
        result = {{"arbitrage", false}, {"pi", to_json(pi)}, {"grid", grid.values()}};
        out << "no arbitrage\n";
      }
    } else if (name == "expectation" || name == "price-bounds") {
      const std::string spec = name == "expectation" ? o.function : o.payoff;
      const auto g = parse_function(spec, grid);
      const auto b = name == "expectation" ? expectation_bounds(set, g, solver) : price_bounds(set, g, solver);
      result = {{"function", spec},
                {"lower", b.lower},
                {"upper", b.upper},
                {"argmin_pi", to_json(b.argmin_pi)},
                {"argmax_pi", to_json(b.argmax_pi)}};
      out << name << " " << spec << ": [" << num(b.lower) << ", " << num(b.upper) << "]\n";
    } else if (name == "ratio") {
      const auto b =
          ratio_bounds(set, parse_function(o.numerator, grid), parse_function(o.denominator, grid), 1e-9, solver);
      result = {{"lower", b.lower},
                {"upper", b.upper},
                {"argmin_pi", to_json(b.argmin_pi)},
                {"argmax_pi", to_json(b.argmax_pi)}};
      out << "ratio: [" << num(b.lower) << ", " << num(b.upper) << "]\n";
    } else if (name == "cdf") {
      const auto g = parse_function(o.function, grid);
      const auto xs = default_points(g, o.points ? o.points : 500);
      const auto c = o.ccdf ? ccdf_bounds(set, g, xs, solver) : cdf_bounds(set, g, xs, solver);
      std::vector<std::vector<std::string>> csv;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        csv.push_back({num(c.xs[k]), num(c.f_min[k]), num(c.f_max[k])});
      }
      writer.csv({"x", "f_min", "f_max"}, csv);
      result = {{"kind", o.ccdf ? "ccdf" : "cdf"},
                {"x", c.xs},
                {"f_min", c.f_min},
                {"f_max", c.f_max},
                {"csv", writer.path(".csv")}};
      out << (o.ccdf ? "ccdf" : "cdf") << ": " << xs.size() << " points -> " << writer.path(".csv") << "\n";
    } else if (name == "var") {
      const auto g = parse_function(o.function, grid);
      std::vector<double> eps = o.eps;
      if (eps.empty()) {
        for (int k = 1; k <= 19; ++k) {
          eps.push_back(0.05 * k);
        }
      }
      std::vector<std::vector<std::string>> csv;
      json arr = json::array();
      for (double e : eps) {
        const auto b = var_bounds(set, g, e, solver);
        csv.push_back({num(e), num(b.lower), num(b.upper)});
        arr.push_back({{"eps", e}, {"lower", b.lower}, {"upper", b.upper}});
      }
      writer.csv({"eps", "var_lower", "var_upper"}, csv);
      result = {{"levels", arr}, {"csv", writer.path(".csv")}};
      out << "var: " << eps.size() << " levels -> " << writer.path(".csv") << "\n";
    } else if (name == "cvar") {
      const auto g = parse_function(o.function, grid);
      const std::vector<double> eps = o.eps.empty() ? std::vector<double>{0.05} : o.eps;
      json arr = json::array();
      for (double e : eps) {
        const auto cv = cvar_upper_bound_with_witness(set, g, e, solver);
        arr.push_back({{"eps", e}, {"cvar_upper", cv.value}, {"pi", to_json(cv.pi)}});
        out << "cvar(" << num(e) << ") <= " << num(cv.value) << "\n";
      }
      result = {{"levels", arr}};
    } else if (name == "maxent") {
      const auto pi = max_entropy(set, solver);
      writer.csv({"p", "pi"}, distribution_rows(grid, pi));
      result = {{"entropy", pi.entropy()}, {"pi", to_json(pi)}, {"csv", writer.path(".csv")}};
      out << "maxent: entropy " << num(pi.entropy()) << "\n";
    } else if (name == "kl-project") {
      Eigen::VectorXd ref;
      if (!o.reference.empty()) {
        ref = read_reference(o.reference);
      } else if (!std::isnan(o.ref_mu) && !std::isnan(o.ref_sigma)) {
        ref = discretize_lognormal({o.ref_mu, o.ref_sigma, grid}).probs();
      } else {
        throw UsageError("kl-project needs --reference or both --ref-mu and --ref-sigma");
      }
      if (static_cast<std::size_t>(ref.size()) != grid.size()) {
        throw InvalidReferenceError("reference has " + std::to_string(ref.size()) + " entries for a grid of " +
                                    std::to_string(grid.size()));
      }
      if ((ref.array() < 0.0).any() || !(ref.sum() > 0.0)) {
        throw InvalidReferenceError("reference entries must be nonnegative with positive total");
      }
      const Distribution eta(ref / ref.sum());
      const auto pi = kl_project(set, eta, solver);
      const double div = kl_divergence(pi.probs(), eta.probs());
      writer.csv({"p", "pi"}, distribution_rows(grid, pi));
      result = {{"divergence", div}, {"pi", to_json(pi)}, {"csv", writer.path(".csv")}};
      out << "kl-project: divergence " << num(div) << "\n";
    } else if (name == "lognormal") {
      const auto starts = default_starts(set, o.starts, o.seed, solver);
      const auto trace = closest_lognormal(set, starts, o.max_iters, o.tol_div, solver);
      json iters = json::array();
      for (const auto& s : trace.iterations) {
        iters.push_back({{"mu", s.fit.mu}, {"sigma", s.fit.sigma}, {"divergence", s.divergence}});
      }
      result = {{"converged", trace.converged}, {"stop_reason", trace.stop_reason}, {"iterations", iters}};
      if (!trace.iterations.empty()) {
        const auto& last = trace.last();
        result["mu"] = last.fit.mu;
        result["sigma"] = last.fit.sigma;
        result["pi"] = to_json(last.pi);
        result["eta"] = to_json(last.eta);
        if (o.days > 0.0) {
          result["annualized_volatility"] = annualized_volatility(last.fit, o.days, o.day_count);
        }
        std::vector<std::vector<std::string>> csv;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          csv.push_back({num(grid[i]), num(last.pi[i]), num(last.eta[i])});
        }
        writer.csv({"p", "pi", "eta"}, csv);
        out << "lognormal: mu " << num(last.fit.mu) << " sigma " << num(last.fit.sigma)
            << (trace.converged ? "" : " (not converged)") << "\n";
      } else {
        out << "lognormal: no iterations (" << trace.stop_reason << ")\n";
      }
    } else if (name == "sensitivity") {
      DualReport rep = o.entropy
                           ? sensitivity_report(set, EntropyProgramOverPi{}, solver)
                           : sensitivity_report(set,
                                                LinearProgramOverPi{parse_function(o.function, grid),
                                                                    o.maximize ? Sense::Maximize : Sense::Minimize,
                                                                    {}},
                                                solver);
      json arr = json::array();
      std::vector<std::vector<std::string>> csv;
      for (const auto& e : rep.per_investment) {
        arr.push_back({{"label", e.label}, {"cost", e.cost}, {"lambda", e.lambda}});
        csv.push_back({e.label, num(e.cost), num(e.lambda)});
      }
      writer.csv({"label", "cost", "lambda"}, csv);
      result = {{"objective_value", rep.objective_value}, {"investments", arr}, {"csv", writer.path(".csv")}};
      out << "sensitivity: optimal value " << num(rep.objective_value) << "\n";
      for (std::size_t k = 0; k < std::min<std::size_t>(5, rep.per_investment.size()); ++k) {
        out << "  " << rep.per_investment[k].label << " " << num(rep.per_investment[k].lambda) << "\n";
      }
    }
  }
  doc["result"] = result;
  doc["exit_code"] = code;
  writer.json_doc(doc);
  return code;
}

} // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 0xF];
  }
  return s;
}

Eigen::VectorXd parse_function(const std::string& spec, const PriceGrid& grid) {
  const auto parts = detail::split(spec, ':');
  const std::string& head = parts[0];
  const Eigen::ArrayXd p = grid.vector().array();
  auto arity = [&](std::size_t n) {
    if (parts.size() != n + 1) {
      throw UsageError("function '" + head + "' takes " + std::to_string(n) + " argument(s): '" + spec + "'");
    }
  };
  auto arg = [&](std::size_t i) { return parse_number(parts[i], spec); };
  if (head == "price") {
    arity(0);
    return p.matrix();
  }
  if (head == "log") {
    arity(0);
    return p.log().matrix();
  }
  if (head == "const") {
    arity(1);
    return Eigen::VectorXd::Constant(p.size(), arg(1));
  }
  if (head == "power") {
    arity(1);
    return p.pow(arg(1)).matrix();
  }
  if (head == "call") {
    arity(1);
    return (p - arg(1)).max(0.0).matrix();
  }
  if (head == "put") {
    arity(1);
    return (arg(1) - p).max(0.0).matrix();
  }
  if (head == "binary") {
    arity(1);
    return (p >= arg(1)).cast<double>().matrix();
  }
  if (head == "indicator") {
    arity(2);
    return indicator(grid, arg(1), arg(2));
  }
  throw UsageError("unknown function '" + spec + "'; expected price, log, const:C, power:A, call:K, put:K, "
                   "binary:K or indicator:LO:HI");
}

int run_subcommand(const std::string& name, const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  std::vector<std::string> all{name};
  all.insert(all.end(), args.begin(), args.end());
  return run(all, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  auto app = make_app(o);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app->parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const std::string name = app->get_subcommands().front()->get_name();
  try {
    return execute(name, o, out);
  } catch (const UsageError& e) {
    err << "rnp " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "rnp " << name << ": " << e.what() << "\n";
    return kExitError;
  }
}

} // namespace rnp::cli
