#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rnp/market.hpp"

namespace rnp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitArbitrage = 2;
inline constexpr int kExitUsage = 64;

/// Runs `rnp <args...>` (args excludes the program name). Result files go to
/// --out; a short summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Same as run() with the subcommand split off.
int run_subcommand(const std::string& name, const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err);

std::string sha256_hex(std::string_view data);

/// Function of the expiration price from a short spec:
/// price, log, const:C, power:A, call:K, put:K, binary:K, indicator:LO:HI.
Eigen::VectorXd parse_function(const std::string& spec, const PriceGrid& grid);

} // namespace rnp::cli
