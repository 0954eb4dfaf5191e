#include "mmlab/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::vector<std::string> checks;
  std::uint64_t seed = 20261014;
  app.add_option("--check", checks, "criterion number or name (repeatable); all when omitted");
  app.add_option("--seed", seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> ks;
  for (const auto& c : checks) {
    const int k = mmlab::criterion_index(c);
    if (k == 0) {
      std::cerr << "unknown criterion '" << c << "'\n";
      return 2;
    }
    ks.push_back(k);
  }
  if (ks.empty())
    for (int k = 1; k <= mmlab::kCriteria; ++k) ks.push_back(k);

  bool ok = true;
  for (const auto& v : mmlab::run_acceptance(ks, seed, std::cout)) ok = ok && v.pass;
  return ok ? 0 : 1;
}
