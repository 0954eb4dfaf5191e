#include "mmlab/cli.hpp"
#include "mmlab/parallel.hpp"
#include "mmlab/parser.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"mmlab: finite-N convex multi-matrix models"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  std::vector<std::string> checks;
  app.add_option("--config", config_path, "key-value or JSON config file");
  app.add_option("--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--out", out, "output directory (overrides run.out)");
  app.add_option("--threads", threads, "worker threads (overrides run.threads)");
  for (const auto& name : mmlab::kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    if (name == "verify") sub->add_option("--check", checks, "acceptance criterion number or name (repeatable)");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    mmlab::RunConfig cfg = config_path.empty() ? mmlab::RunConfig{} : mmlab::load_config(config_path);
    mmlab::apply_environment(cfg, mmlab::environment_overrides());
    if (app.count("--seed")) cfg.run.seed = seed;
    if (app.count("--out")) cfg.run.out = out;
    if (app.count("--threads")) cfg.run.threads = threads;
    mmlab::validate(cfg);
    mmlab::set_thread_count(cfg.run.threads);
    const mmlab::RunReport r = mmlab::run_command(command, cfg, checks, std::cout);
    if (command == "verify")
      std::cout << (r.pass() ? "all checks passed" : "some checks failed") << " (" << r.verdicts.size()
                << " verdicts, report in " << cfg.run.out << "/report.json)\n";
    return mmlab::exit_code(r);
  } catch (const mmlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mmlab::ParseError& e) {
    std::cerr << "error: parse error at line " << e.line() << ", column " << e.column() << " near '" << e.token()
              << "': " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
