#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coda/config.hpp"

namespace coda {

struct RunSummary {
  std::string tag;
  std::string config_hash;
  double final_auc = 0.5;
  std::uint64_t total_rounds = 0;
  std::uint64_t total_iterations = 0;
  std::uint64_t scalars_moved = 0;
  std::optional<std::uint64_t> iterations_to_target;
  std::optional<std::uint64_t> rounds_to_target;
  double p = 0.5;
  double G_h = 0.0;
  double L_v = 1.0;
};

// Builds data, cluster and scorer from `cfg`, runs the selected algorithm and
// writes a JSONL stream to cfg.output: one config record, one record per
// RunMetrics, one summary record. Each line is flushed as it is written.
RunSummary run_experiment(const RunConfig& cfg);

// Same, writing the JSONL stream to `out` instead of cfg.output.
RunSummary run_experiment(const RunConfig& cfg, std::ostream& out);

std::string summary_line(const RunSummary& s);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// "key=v1,v2,..." -> axis.
SweepAxis parse_sweep_axis(const std::string& spec);

// One run per value; each run gets tag "key=value" and output
// "<stem>.<key>=<value><ext>" beside cfg.output.
std::vector<RunSummary> run_sweep(const std::string& config_text, const ConfigOverrides& base_overrides,
                                  const SweepAxis& axis, bool parallel, const std::string& source = "<config>");

void print_sweep_table(std::ostream& os, const SweepAxis& axis, const std::vector<RunSummary>& runs);

}  // namespace coda
