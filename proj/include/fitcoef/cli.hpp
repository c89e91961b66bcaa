#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fitcoef/kernel.hpp"

namespace fitcoef::cli {

/// Parses argv (without the program name) and runs the command.
/// Exit codes: 0 success, 1 computation error, 2 usage error.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `silverman` | `silverman-normal` | `fixed:<value>` | `fixed:<c>sd`.
/// Returns the rule and, for the `sd` form, the multiplier to apply to s.
struct BandwidthFlag {
  BandwidthRule rule;
  double sd_fraction = 0.0;  // > 0 only for fixed:<c>sd
};

BandwidthFlag parse_bandwidth_flag(const std::string& text);

}  // namespace fitcoef::cli
