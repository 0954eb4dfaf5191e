#pragma once

#include "mmlab/config.hpp"
#include "mmlab/report.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mmlab {

inline const std::vector<std::string> kCommands = {"sample",    "moments",   "semigroup",  "condexp",
                                                   "entropy",   "transport", "triangular", "verify"};

// Runs a subcommand, writing its files below cfg.run.out together with
// report.json. `checks` restricts `verify` to the named acceptance criteria.
RunReport run_command(const std::string& command, const RunConfig& cfg, const std::vector<std::string>& checks,
                      std::ostream& out);

// Exit status for a report: 0 when every verdict passed.
int exit_code(const RunReport& r);

}  // namespace mmlab
