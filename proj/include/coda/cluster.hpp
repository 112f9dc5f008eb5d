#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coda/data.hpp"
#include "coda/objective.hpp"
#include "coda/rng.hpp"

namespace coda {

struct CommLedger {
  std::uint64_t rounds = 0;
  std::uint64_t scalars_up = 0;
  std::uint64_t scalars_down = 0;

  std::uint64_t scalars_moved() const { return scalars_up + scalars_down; }
  friend bool operator==(const CommLedger&, const CommLedger&) = default;
};

struct WorkerState {
  std::size_t worker_id = 0;
  PrimalPoint v;
  double alpha = 0.0;
  // Sum of the post-update (and post-averaging) iterates v_1..v_t.
  std::vector<double> running_v_sum;
  Engine rng;
  std::size_t local_steps = 0;
};

// Per-worker sufficient statistics of a dual restart minibatch.
struct RestartStats {
  double h_minus = 0.0;
  std::size_t n_minus = 0;
  double h_plus = 0.0;
  std::size_t n_plus = 0;
};

// Star-topology parameter server over K simulated workers. Worker k owns
// shard k; the ledger is touched only by the two reduction operations.
class ClusterSim {
 public:
  ClusterSim(Dataset data, ShardAssignment shards);

  std::size_t num_workers() const { return workers_.size(); }
  const Dataset& data() const { return data_; }
  const ShardAssignment& shards() const { return shards_; }
  std::span<const std::size_t> shard(std::size_t k) const { return shards_.worker_shards.at(k); }

  std::span<WorkerState> workers() { return workers_; }
  std::span<const WorkerState> workers() const { return workers_; }
  const CommLedger& ledger() const { return ledger_; }

  // Sets every worker to (v0, alpha0), clears running sums and reseeds the
  // solver stream from (seed, stage, worker_id).
  void reset_workers(const PrimalPoint& v0, double alpha0, std::uint64_t seed, std::size_t stage);

  // Replaces every worker's (v, alpha) by the across-worker mean. One round.
  void average_primal_dual();

  // Server side of the dual restart: mean over workers of
  // h_minus/n_minus - h_plus/n_plus, where a worker with an empty class is
  // dropped from that class's term only. One round.
  double aggregate_restart(std::span<const RestartStats> per_worker);

 private:
  Dataset data_;
  ShardAssignment shards_;
  std::vector<WorkerState> workers_;
  CommLedger ledger_;
};

}  // namespace coda
