#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coda/cluster.hpp"
#include "coda/objective.hpp"
#include "coda/scorer.hpp"

namespace coda {

struct DsgConfig {
  double eta = 0.01;
  std::size_t T = 1;
  std::size_t I = 1;
  double gamma = 0.5;
  PrimalPoint anchor_v0;
  double alpha0 = 0.0;
  std::size_t minibatch = 1;

  // Throws unless eta <= min{1/(2p(1-p)), 1/(2p), 1/(2(1-p))} and the other
  // fields are in range. Returns whether the full one-stage step bound holds.
  bool validate(const ProblemConstants& constants) const;
};

// argmin_u  g.u + |u - v|^2/(2 eta) + |u - v0|^2/(2 gamma)
//         = (gamma v + eta v0 - eta gamma g) / (eta + gamma)
void prox_primal_step(std::span<double> v, std::span<const double> g, std::span<const double> v0, double eta,
                      double gamma);
PrimalPoint prox_primal_step(const PrimalPoint& v, std::span<const double> g, const DsgConfig& cfg);

inline double dual_step(double alpha, double g_alpha, double eta) { return alpha + eta * g_alpha; }

// Called after local step t (1-based) and after any averaging at t.
using DsgObserver = std::function<void(std::size_t t, std::span<const WorkerState> workers)>;

struct DsgOptions {
  std::uint64_t seed = 0;
  std::size_t stage = 1;
  std::size_t threads = 1;
  DsgObserver observer;
  // Observer cadence in steps; 0 disables it.
  std::size_t observe_every = 0;
};

struct DsgResult {
  PrimalPoint v_tilde;
  std::uint64_t rounds = 0;
};

// Runs T local primal-dual steps on every worker with averaging after every
// I-th step. Worker states are left in `cluster` for inspection.
DsgResult run_dsg(ClusterSim& cluster, const ScorerSpec& spec, const DsgConfig& cfg,
                  const ProblemConstants& constants, const DsgOptions& opts = {});

// One local step of worker `w`: draws `minibatch` samples from its shard,
// averages their gradients and applies the prox/dual updates.
void local_step(WorkerState& w, std::span<const std::size_t> shard, const Dataset& data, const ScorerSpec& spec,
                const DsgConfig& cfg, double p, std::span<double> grad_scratch, std::span<double> grad_accum);

}  // namespace coda
