#include "mmlab/report.hpp"

#include "mmlab/format.hpp"
#include "mmlab/parallel.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <sstream>

namespace mmlab {

std::string verdict_line(const Verdict& v) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %s value=%.6g budget=%.6g (%.1f s)", v.pass ? "PASS" : "FAIL", v.name.c_str(),
                v.value, v.budget, v.seconds);
  std::string out = buf;
  if (!v.detail.empty()) out += " " + v.detail;
  return out;
}

Fingerprint fingerprint(std::uint64_t seed) {
  Fingerprint f;
#if defined(__clang__)
  f.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  f.compiler = "gcc " __VERSION__;
#else
  f.compiler = "unknown";
#endif
  f.eigen = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
            std::to_string(EIGEN_MINOR_VERSION);
  f.threads = thread_count();
  f.seed = seed;
  return f;
}

bool RunReport::pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

std::string RunReport::to_json() const {
  std::ostringstream os;
  os << "{\"command\":" << json_string(command) << ",\"pass\":" << (pass() ? "true" : "false")
     << ",\"seconds\":" << fmt17(seconds) << ",\"environment\":{\"compiler\":" << json_string(env.compiler)
     << ",\"eigen\":" << json_string(env.eigen) << ",\"threads\":" << env.threads << ",\"seed\":" << env.seed
     << "},\"verdicts\":[";
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    os << (i ? "," : "") << "{\"name\":" << json_string(v.name) << ",\"pass\":" << (v.pass ? "true" : "false")
       << ",\"value\":" << fmt17(v.value) << ",\"budget\":" << fmt17(v.budget)
       << ",\"detail\":" << json_string(v.detail) << ",\"seconds\":" << fmt17(v.seconds) << "}";
  }
  os << "],\"config\":" << json_string(config) << "}";
  return os.str();
}

}  // namespace mmlab
