#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmlab {

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0;   // headline statistic
  double budget = 0;  // allowance it is compared against
  std::string detail;
  double seconds = 0;
};

// One line: "PASS <name> value=... budget=... (<seconds> s) <detail>".
std::string verdict_line(const Verdict& v);

struct Fingerprint {
  std::string compiler;
  std::string eigen;
  int threads = 1;
  std::uint64_t seed = 0;
};

Fingerprint fingerprint(std::uint64_t seed);

struct RunReport {
  std::string command;
  std::vector<Verdict> verdicts;
  std::string config;  // canonical echo
  Fingerprint env;
  double seconds = 0;

  bool pass() const;
  std::string to_json() const;
};

}  // namespace mmlab
