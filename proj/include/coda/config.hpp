#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coda/coda.hpp"
#include "coda/scorer.hpp"

namespace coda {

enum class Algorithm { coda, np_ppdsg, ppdsg };

std::string_view to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

// Fully resolved run configuration. Optional members stay unset when their
// value is derived from the data at run time (p, G_h, L_v, ...).
struct RunConfig {
  // data
  std::string source = "synthetic";  // "synthetic" or a LIBSVM/CSV file path
  std::optional<std::string> test_path;
  std::size_t synth_n = 20000;
  std::size_t synth_dim = 20;
  double synth_p = 0.5;
  double separation = 1.0;
  std::size_t test_n = 5000;
  double test_fraction = 0.2;
  std::optional<std::size_t> dim_hint;
  std::optional<double> target_p;

  // model
  ScorerKind scorer = ScorerKind::linear_sigmoid;
  std::size_t hidden = 0;

  // algorithm
  Algorithm algorithm = Algorithm::coda;
  std::size_t workers = 4;
  std::size_t stages = 3;
  double eta0 = 0.01;
  std::size_t T0 = 2000;
  std::size_t comm_interval = 8;
  ScheduleMode schedule = ScheduleMode::geometric3;
  bool theorem_intervals = false;  // theorem mode: use the I_s formula instead of comm_interval
  std::optional<double> L_v;
  double mu = 0.1;
  std::optional<double> G_h;
  std::optional<double> eta_cap;
  std::size_t minibatch = 1;
  std::optional<std::size_t> restart_batch;

  // run
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;
  bool eval_phi = false;
  std::size_t threads = 1;
  std::string output = "metrics.jsonl";
  std::optional<double> target_auc;
  bool record_wall_time = false;
  std::string tag;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// key -> raw value, applied on top of the file contents before validation.
using ConfigOverrides = std::map<std::string, std::string>;

// Flat "key = value" text, '#' starts a comment. Unknown or repeated keys and
// inconsistent algorithm settings are rejected. Every defaulted key is logged.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {},
                       std::string_view source = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// FNV-1a 64 of serialize_config with output and threads blanked, as 16 hex
// digits. Those two keys never change the metrics.
std::string config_hash(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace coda
