#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "coda/cluster.hpp"
#include "coda/dsg.hpp"
#include "coda/metrics.hpp"
#include "coda/objective.hpp"
#include "coda/scorer.hpp"

namespace coda {

// theorem: eta_s = eta_0 K e^{-(s-1)c}, T_s ~ e^{(s-1)c}, I_s = 1/sqrt(K eta_s).
// geometric3: eta_s = eta_0 / 3^{s-1}, T_s = T_0 3^{s-1}, fixed I.
enum class ScheduleMode { theorem, geometric3 };

std::string_view to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view name);

struct StageSchedule {
  std::size_t s = 1;
  double eta = 0.0;
  std::size_t T = 1;
  std::size_t I = 1;
  std::size_t m = 1;  // dual-restart minibatch per worker
};

struct CodaConfig {
  std::size_t K = 1;
  std::size_t S = 1;
  double eta0 = 0.01;
  double L_v = 1.0;
  double mu = 0.1;
  double G_h = 0.25;
  double p = 0.5;  // empirical positive ratio of the training set
  // Upper clamp on eta_s; 0 selects min{1/(2p(1-p)), 1/(2p), 1/(2(1-p))}.
  double eta_cap = 0.0;
  std::uint64_t seed = 0;
  ScheduleMode mode = ScheduleMode::geometric3;
  std::size_t T0 = 2000;
  // Fixed communication interval. Required in geometric3 mode; in theorem
  // mode 0 selects the I_s formula.
  std::size_t comm_interval = 0;
  // Fixed restart minibatch; 0 selects the m_s formula.
  std::size_t restart_batch = 0;
  // Upper clamp on m_s; 0 means unclamped (run_coda sets 10 x smallest shard).
  std::size_t restart_cap = 0;
  std::size_t minibatch = 1;

  // c = (mu/L_v) / (5 + mu/L_v)
  double c() const;
  double effective_eta_cap() const;
  double gamma() const { return 1.0 / (2.0 * L_v); }
  void validate() const;
};

StageSchedule build_schedule(const CodaConfig& cfg, std::size_t s);

// Total communication rounds of S stages: sum_s floor(T_s/I_s) + 1.
std::uint64_t expected_rounds(const CodaConfig& cfg);

// Every worker draws m samples (with replacement) and reports class sums and
// counts of h(v; x); the server combines them via aggregate_restart. A
// minibatch missing a class is redrawn up to 100 times first.
double restart_alpha(ClusterSim& cluster, const ScorerSpec& spec, const PrimalPoint& v, std::size_t m,
                     std::uint64_t seed, std::size_t stage);

struct CodaOptions {
  const Dataset* test = nullptr;
  // Mid-stage evaluation cadence in inner iterations; 0 evaluates per stage only.
  std::size_t eval_every = 0;
  bool eval_phi = false;
  std::size_t threads = 1;
  bool record_wall_time = false;
  // Initial primal point; empty selects initial_params(spec, seed) with a = b = 0.
  PrimalPoint v0;
  std::function<void(const RunMetrics&)> on_metrics;
  // Test hook forwarded to every DSG call (stage index, step, workers).
  std::function<void(std::size_t, std::size_t, std::span<const WorkerState>)> inner_observer;
  std::size_t inner_observe_every = 0;
};

struct StageRecord {
  StageSchedule schedule;
  PrimalPoint v;
  double alpha = 0.0;  // restart value handed to the next stage
};

struct CodaResult {
  PrimalPoint v;
  std::vector<StageRecord> stages;
  std::vector<RunMetrics> metrics;
  CommLedger ledger;
  std::uint64_t iterations = 0;
};

CodaResult run_coda(const CodaConfig& cfg, ClusterSim& cluster, const ScorerSpec& spec,
                    const CodaOptions& opts = {});

}  // namespace coda
