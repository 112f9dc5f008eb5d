// Command-line front end: single runs and one-axis parameter sweeps.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "coda/config.hpp"
#include "coda/error.hpp"
#include "coda/log.hpp"
#include "coda/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw coda::Error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report(const std::string& kind, const std::string& message, const coda::ParseError* pe = nullptr) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  if (pe) {
    err["line"] = pe->line();
    err["column"] = pe->column();
  }
  std::cerr << err.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication-efficient distributed AUC maximization"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug|info|warn|error|off");

  std::string config_path;
  coda::ConfigOverrides overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, algo;
  std::optional<std::size_t> workers, interval;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--seed", seed);
  run->add_option("--out", out, "Metrics output path (JSONL)");
  run->add_option("--algo", algo)->check(CLI::IsMember({"coda", "np_ppdsg", "ppdsg"}));
  run->add_option("--workers", workers);
  run->add_option("--comm-interval", interval);

  std::string vary;
  bool parallel = false;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a config key");
  sweep->add_option("--config", config_path, "Config file")->required();
  sweep->add_option("--vary", vary, "key=v1,v2,...")->required();
  sweep->add_flag("--parallel", parallel, "Run the sweep points concurrently");

  CLI11_PARSE(app, argc, argv);

  try {
    if (log_level == "debug") coda::log::set_level(coda::log::Level::debug);
    else if (log_level == "info") coda::log::set_level(coda::log::Level::info);
    else if (log_level == "warn") coda::log::set_level(coda::log::Level::warn);
    else if (log_level == "error") coda::log::set_level(coda::log::Level::error);
    else if (log_level == "off") coda::log::set_level(coda::log::Level::off);
    else return report("usage", "unknown log level '" + log_level + "'");

    const std::string text = read_file(config_path);
    if (*run) {
      if (seed) overrides["seed"] = std::to_string(*seed);
      if (out) overrides["output"] = *out;
      if (algo) overrides["algorithm"] = *algo;
      if (workers) overrides["workers"] = std::to_string(*workers);
      if (interval) overrides["comm_interval"] = std::to_string(*interval);
      const auto cfg = coda::parse_config(text, overrides, config_path);
      const auto summary = coda::run_experiment(cfg);
      std::cout << coda::summary_line(summary) << '\n';
    } else {
      const auto axis = coda::parse_sweep_axis(vary);
      const auto runs = coda::run_sweep(text, overrides, axis, parallel, config_path);
      for (const auto& r : runs) std::cout << coda::summary_line(r) << '\n';
      coda::print_sweep_table(std::cout, axis, runs);
    }
  } catch (const coda::ParseError& e) {
    return report("config", e.what(), &e);
  } catch (const coda::Error& e) {
    return report("runtime", e.what());
  } catch (const std::exception& e) {
    return report("internal", e.what());
  }
  return 0;
}
