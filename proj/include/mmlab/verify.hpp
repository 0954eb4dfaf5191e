#pragma once

#include "mmlab/config.hpp"
#include "mmlab/report.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmlab {

inline constexpr int kCriteria = 16;

std::string criterion_name(int k);
// Accepts the number or the name; 0 when unknown.
int criterion_index(const std::string& name);

// Runs one acceptance criterion. Diagnostics go to `log` as indented lines,
// followed by the verdict line.
Verdict run_criterion(int k, std::uint64_t seed, std::ostream& log);
std::vector<Verdict> run_acceptance(const std::vector<int>& checks, std::uint64_t seed, std::ostream& log);

// Window, mean and variance, Schwinger-Dyson, concentration, Fisher sandwich,
// log-Sobolev and Talagrand checks on the configured model at the first grid size.
std::vector<Verdict> model_suite(const RunConfig& cfg, std::ostream& log);

}  // namespace mmlab
