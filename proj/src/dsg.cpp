#include "coda/dsg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "coda/error.hpp"
#include "coda/log.hpp"

namespace coda {

bool DsgConfig::validate(const ProblemConstants& constants) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error("dsg: eta must be a positive finite number");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("dsg: gamma must be a positive finite number");
  if (T < 1) throw Error("dsg: T must be >= 1");
  if (I < 1) throw Error("dsg: I must be >= 1");
  if (minibatch < 1) throw Error("dsg: minibatch must be >= 1");
  if (anchor_v0.size() < 2 || !anchor_v0.all_finite() || !std::isfinite(alpha0)) {
    throw Error("dsg: anchor point must be finite");
  }
  const double cap = constants.step_cap();
  if (eta > cap) {
    std::ostringstream msg;
    msg << "dsg: eta=" << eta << " exceeds min{1/(2p(1-p)), 1/(2p), 1/(2(1-p))} = " << cap << " at p=" << constants.p;
    throw Error(msg.str());
  }
  return eta <= constants.full_step_bound();
}

void prox_primal_step(std::span<double> v, std::span<const double> g, std::span<const double> v0, double eta,
                      double gamma) {
  const double denom = eta + gamma;
  const double eg = eta * gamma;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (gamma * v[i] + eta * v0[i] - eg * g[i]) / denom;
}

PrimalPoint prox_primal_step(const PrimalPoint& v, std::span<const double> g, const DsgConfig& cfg) {
  if (g.size() != v.size() || cfg.anchor_v0.size() != v.size()) throw Error("prox_primal_step: size mismatch");
  PrimalPoint out = v;
  prox_primal_step(out.flat(), g, cfg.anchor_v0.flat(), cfg.eta, cfg.gamma);
  return out;
}

void local_step(WorkerState& w, std::span<const std::size_t> shard, const Dataset& data, const ScorerSpec& spec,
                const DsgConfig& cfg, double p, std::span<double> grad_scratch, std::span<double> grad_accum) {
  double g_alpha;
  std::span<const double> g;
  if (cfg.minibatch == 1) {
    const auto& z = data[shard[uniform_index(w.rng, shard.size())]];
    g_alpha = grad_F(spec, w.v, w.alpha, z, p, grad_scratch);
    g = grad_scratch;
  } else {
    std::fill(grad_accum.begin(), grad_accum.end(), 0.0);
    g_alpha = 0.0;
    for (std::size_t b = 0; b < cfg.minibatch; ++b) {
      const auto& z = data[shard[uniform_index(w.rng, shard.size())]];
      g_alpha += grad_F(spec, w.v, w.alpha, z, p, grad_scratch);
      for (std::size_t i = 0; i < grad_accum.size(); ++i) grad_accum[i] += grad_scratch[i];
    }
    const double inv = static_cast<double>(cfg.minibatch);
    for (auto& x : grad_accum) x /= inv;
    g_alpha /= inv;
    g = grad_accum;
  }

  prox_primal_step(w.v.flat(), g, cfg.anchor_v0.flat(), cfg.eta, cfg.gamma);
  w.alpha = dual_step(w.alpha, g_alpha, cfg.eta);
  ++w.local_steps;
  if (!w.v.all_finite() || !std::isfinite(w.alpha)) {
    throw Error("dsg: non-finite iterate on worker " + std::to_string(w.worker_id) + " at iteration " +
                std::to_string(w.local_steps));
  }
}

namespace {

void accumulate(WorkerState& w) {
  const auto flat = w.v.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) w.running_v_sum[i] += flat[i];
}

}  // namespace

DsgResult run_dsg(ClusterSim& cluster, const ScorerSpec& spec, const DsgConfig& cfg,
                  const ProblemConstants& constants, const DsgOptions& opts) {
  if (cfg.anchor_v0.param_count() != spec.param_count()) throw Error("dsg: anchor does not match the scorer");
  if (!cfg.validate(constants)) {
    log::debug("dsg: eta=" + std::to_string(cfg.eta) + " violates the full one-stage step bound " +
               std::to_string(constants.full_step_bound()));
  }

  cluster.reset_workers(cfg.anchor_v0, cfg.alpha0, opts.seed, opts.stage);
  auto workers = cluster.workers();
  const std::size_t K = workers.size();
  const std::size_t n = cfg.anchor_v0.size();
  const double p = constants.p;

  std::vector<std::vector<double>> scratch(K, std::vector<double>(n)), accum(K, std::vector<double>(n));
  const std::size_t threads = std::clamp<std::size_t>(opts.threads, 1, K);
  const bool observing = opts.observer && opts.observe_every > 0;

  std::uint64_t rounds = 0;
  std::size_t t = 0;
  while (t < cfg.T) {
    std::size_t seg_end = std::min(cfg.T, (t / cfg.I + 1) * cfg.I);
    if (observing) seg_end = std::min(seg_end, (t / opts.observe_every + 1) * opts.observe_every);
    const bool sync = seg_end % cfg.I == 0;

    auto run_worker = [&](std::size_t k) {
      auto& w = workers[k];
      const auto shard = cluster.shard(k);
      for (std::size_t s = t; s < seg_end; ++s) {
        local_step(w, shard, cluster.data(), spec, cfg, p, scratch[k], accum[k]);
        if (s + 1 < seg_end || !sync) accumulate(w);
      }
    };

    if (threads == 1) {
      for (std::size_t k = 0; k < K; ++k) run_worker(k);
    } else {
      std::vector<std::exception_ptr> errors(threads);
      {
        std::vector<std::jthread> pool;
        for (std::size_t tid = 0; tid < threads; ++tid) {
          pool.emplace_back([&, tid] {
            try {
              for (std::size_t k = tid; k < K; k += threads) run_worker(k);
            } catch (...) {
              errors[tid] = std::current_exception();
            }
          });
        }
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    if (sync) {
      cluster.average_primal_dual();
      ++rounds;
      for (auto& w : workers) accumulate(w);
    }
    t = seg_end;
    if (observing && t % opts.observe_every == 0) opts.observer(t, cluster.workers());
  }

  // v_tilde = (1/K) sum_k (1/T) sum_t v_t^k, reduced in worker-id order.
  const double T = static_cast<double>(cfg.T);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = workers[0].running_v_sum[i] / T;
  for (std::size_t k = 1; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) out[i] += workers[k].running_v_sum[i] / T;
  }
  if (K > 1) {
    for (auto& x : out) x /= static_cast<double>(K);
  }
  return {PrimalPoint::from_flat(std::move(out)), rounds};
}

}  // namespace coda
