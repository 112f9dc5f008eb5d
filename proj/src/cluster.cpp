#include "coda/cluster.hpp"

#include <string>

#include "coda/error.hpp"
#include "coda/log.hpp"

namespace coda {

ClusterSim::ClusterSim(Dataset data, ShardAssignment shards) : data_(std::move(data)), shards_(std::move(shards)) {
  if (shards_.num_workers() == 0) throw Error("cluster: at least one worker is required");
  for (std::size_t k = 0; k < shards_.num_workers(); ++k) {
    if (shards_.worker_shards[k].empty()) throw Error("cluster: worker " + std::to_string(k) + " has an empty shard");
    for (auto i : shards_.worker_shards[k]) {
      if (i >= data_.size()) throw Error("cluster: shard index out of range");
    }
  }
  workers_.resize(shards_.num_workers());
  for (std::size_t k = 0; k < workers_.size(); ++k) workers_[k].worker_id = k;
}

void ClusterSim::reset_workers(const PrimalPoint& v0, double alpha0, std::uint64_t seed, std::size_t stage) {
  for (auto& w : workers_) {
    w.v = v0;
    w.alpha = alpha0;
    w.running_v_sum.assign(v0.size(), 0.0);
    w.rng.seed(derive_seed(seed, stage, w.worker_id, StreamKind::solver));
    w.local_steps = 0;
  }
}

void ClusterSim::average_primal_dual() {
  const std::size_t K = workers_.size();
  const std::size_t steps = workers_.front().local_steps;
  for (const auto& w : workers_) {
    if (w.local_steps != steps) {
      throw Error("cluster: barrier violation, worker " + std::to_string(w.worker_id) + " is at step " +
                  std::to_string(w.local_steps) + " while worker 0 is at " + std::to_string(steps));
    }
  }

  const std::size_t n = workers_.front().v.size();
  if (K > 1) {
    std::vector<double> mean(workers_.front().v.flat().begin(), workers_.front().v.flat().end());
    double alpha = workers_.front().alpha;
    for (std::size_t k = 1; k < K; ++k) {
      const auto flat = workers_[k].v.flat();
      for (std::size_t i = 0; i < n; ++i) mean[i] += flat[i];
      alpha += workers_[k].alpha;
    }
    const double inv = static_cast<double>(K);
    for (auto& m : mean) m /= inv;
    alpha /= inv;
    for (auto& w : workers_) {
      std::copy(mean.begin(), mean.end(), w.v.flat().begin());
      w.alpha = alpha;
    }
  }

  const auto payload = static_cast<std::uint64_t>(K * (n + 1));
  ledger_.rounds += 1;
  ledger_.scalars_up += payload;
  ledger_.scalars_down += payload;
}

double ClusterSim::aggregate_restart(std::span<const RestartStats> per_worker) {
  const std::size_t K = workers_.size();
  if (per_worker.size() != K) throw Error("aggregate_restart: expected one statistics record per worker");

  double neg_terms = 0.0, pos_terms = 0.0;
  std::size_t neg_workers = 0, pos_workers = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& s = per_worker[k];
    if (s.n_minus > 0) {
      neg_terms += s.h_minus / static_cast<double>(s.n_minus);
      ++neg_workers;
    } else {
      log::warn("restart: worker " + std::to_string(k) + " has no negative samples; excluded from that term");
    }
    if (s.n_plus > 0) {
      pos_terms += s.h_plus / static_cast<double>(s.n_plus);
      ++pos_workers;
    } else {
      log::warn("restart: worker " + std::to_string(k) + " has no positive samples; excluded from that term");
    }
  }
  if (neg_workers == 0 || pos_workers == 0) {
    throw Error("aggregate_restart: every worker is missing a class; dataset is degenerate");
  }

  ledger_.rounds += 1;
  ledger_.scalars_up += 4 * static_cast<std::uint64_t>(K);
  ledger_.scalars_down += static_cast<std::uint64_t>(K);
  return neg_terms / static_cast<double>(neg_workers) - pos_terms / static_cast<double>(pos_workers);
}

}  // namespace coda
