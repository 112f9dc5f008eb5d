#include "coda/coda.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <cmath>
#include <string>

#include "coda/error.hpp"
#include "coda/log.hpp"

namespace coda {
namespace {

constexpr int kRestartRetries = 100;

std::size_t ceil_count(double x) {
  if (!(x < 1e15)) return static_cast<std::size_t>(1e15);
  return static_cast<std::size_t>(std::ceil(x));
}

struct StepAndLength {
  double eta;
  std::size_t T;
};

StepAndLength step_and_length(const CodaConfig& cfg, std::size_t s) {
  const double K = static_cast<double>(cfg.K);
  const double cap = cfg.effective_eta_cap();
  if (cfg.mode == ScheduleMode::theorem) {
    const double c = cfg.c();
    const double k = static_cast<double>(s - 1);
    const double eta = std::min(cfg.eta0 * K * std::exp(-k * c), cap);
    const double T = std::max(8.0, 8.0 * cfg.G_h * cfg.G_h) / (cfg.L_v * cfg.eta0 * K) * std::exp(k * c);
    return {eta, std::max<std::size_t>(1, ceil_count(T))};
  }
  const double scale = std::pow(3.0, static_cast<double>(s - 1));
  std::size_t T = cfg.T0;
  for (std::size_t i = 1; i < s; ++i) T *= 3;
  return {std::min(cfg.eta0 / scale, cap), T};
}

}  // namespace

std::string_view to_string(ScheduleMode mode) {
  return mode == ScheduleMode::theorem ? "theorem" : "geometric3";
}

ScheduleMode parse_schedule_mode(std::string_view name) {
  if (name == "theorem") return ScheduleMode::theorem;
  if (name == "geometric3") return ScheduleMode::geometric3;
  throw Error("unknown schedule mode '" + std::string(name) + "'");
}

double CodaConfig::c() const {
  const double r = mu / L_v;
  return r / (5.0 + r);
}

double CodaConfig::effective_eta_cap() const {
  if (eta_cap > 0.0) return eta_cap;
  const double q = 1.0 - p;
  return std::min({1.0 / (2.0 * p * q), 1.0 / (2.0 * p), 1.0 / (2.0 * q)});
}

void CodaConfig::validate() const {
  if (K < 1) throw Error("coda: K must be >= 1");
  if (S < 1) throw Error("coda: S must be >= 1");
  if (!(eta0 > 0.0)) throw Error("coda: eta0 must be > 0");
  if (!(L_v > 0.0)) throw Error("coda: L_v must be > 0");
  if (!(mu > 0.0 && mu <= 1.0)) throw Error("coda: mu must lie in (0,1]");
  if (!(G_h >= 0.0)) throw Error("coda: G_h must be >= 0");
  if (!(p > 0.0 && p < 1.0)) throw Error("coda: p must lie in (0,1)");
  if (eta_cap < 0.0) throw Error("coda: eta_cap must be >= 0");
  if (minibatch < 1) throw Error("coda: minibatch must be >= 1");
  if (mode == ScheduleMode::geometric3) {
    if (T0 < 1) throw Error("coda: T0 must be >= 1");
    if (comm_interval < 1) throw Error("coda: geometric3 schedule needs a fixed comm_interval >= 1");
  }
}

StageSchedule build_schedule(const CodaConfig& cfg, std::size_t s) {
  if (s < 1) throw Error("build_schedule: stages are numbered from 1");
  const auto [eta, T] = step_and_length(cfg, s);

  StageSchedule out;
  out.s = s;
  out.eta = eta;
  out.T = T;
  if (cfg.comm_interval > 0) {
    out.I = cfg.comm_interval;
  } else {
    const double raw = 1.0 / std::sqrt(static_cast<double>(cfg.K) * eta);
    out.I = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw + 0.5)));
  }

  if (cfg.restart_batch > 0) {
    out.m = cfg.restart_batch;
  } else {
    const auto [eta_next, T_next] = step_and_length(cfg, s + 1);
    const double p = cfg.p, q = 1.0 - p;
    const double pt = std::max(p, q);
    const double log_inv = std::log(1.0 / pt);
    const double C = 3.0 * std::pow(pt, 1.0 / log_inv) / (2.0 * log_inv);
    const double variance_term =
        (1.0 + C) / (eta_next * eta_next * static_cast<double>(T_next) * p * p * (q * q));
    const double union_term = std::log(static_cast<double>(cfg.K)) / log_inv;
    out.m = std::max({ceil_count(variance_term), ceil_count(union_term), std::size_t{1}});
  }
  if (cfg.restart_cap > 0) out.m = std::min(out.m, cfg.restart_cap);
  return out;
}

std::uint64_t expected_rounds(const CodaConfig& cfg) {
  std::uint64_t total = 0;
  for (std::size_t s = 1; s <= cfg.S; ++s) {
    const auto sched = build_schedule(cfg, s);
    total += sched.T / sched.I + 1;
  }
  return total;
}

double restart_alpha(ClusterSim& cluster, const ScorerSpec& spec, const PrimalPoint& v, std::size_t m,
                     std::uint64_t seed, std::size_t stage) {
  if (m < 1) throw Error("restart_alpha: minibatch size must be >= 1");
  const std::size_t K = cluster.num_workers();
  std::vector<RestartStats> stats(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto shard = cluster.shard(k);
    Engine eng(derive_seed(seed, stage, k, StreamKind::restart));
    RestartStats st;
    for (int attempt = 0; attempt <= kRestartRetries; ++attempt) {
      st = {};
      for (std::size_t i = 0; i < m; ++i) {
        const auto& z = cluster.data()[shard[uniform_index(eng, shard.size())]];
        const double h = score(spec, v.w(), z.features);
        if (z.label == 1) {
          st.h_plus += h;
          ++st.n_plus;
        } else {
          st.h_minus += h;
          ++st.n_minus;
        }
      }
      if (st.n_plus > 0 && st.n_minus > 0) break;
    }
    stats[k] = st;
  }
  return cluster.aggregate_restart(stats);
}

CodaResult run_coda(const CodaConfig& cfg_in, ClusterSim& cluster, const ScorerSpec& spec, const CodaOptions& opts) {
  CodaConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.K != cluster.num_workers()) {
    throw Error("coda: config has K=" + std::to_string(cfg.K) + " but the cluster has " +
                std::to_string(cluster.num_workers()) + " workers");
  }
  if (cfg.restart_cap == 0) cfg.restart_cap = 10 * cluster.shards().min_shard_size();

  const auto constants = ProblemConstants::make(cfg.p, cfg.G_h, cfg.L_v, cfg.mu);
  const auto start = std::chrono::steady_clock::now();

  CodaResult result;
  PrimalPoint v_prev = opts.v0;
  if (v_prev.size() == 0) v_prev = PrimalPoint(initial_params(spec, cfg.seed), 0.0, 0.0);
  if (v_prev.param_count() != spec.param_count()) throw Error("coda: v0 does not match the scorer");
  double alpha_prev = 0.0;

  auto emit = [&](RunMetrics m) {
    if (opts.record_wall_time) {
      m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (opts.on_metrics) opts.on_metrics(m);
    result.metrics.push_back(std::move(m));
  };
  auto snapshot = [&](std::string kind, std::size_t stage, std::uint64_t iters, const PrimalPoint& v) {
    RunMetrics m;
    m.kind = std::move(kind);
    m.stage = stage;
    m.cumulative_iterations = iters;
    m.cumulative_rounds = cluster.ledger().rounds;
    m.scalars_moved = cluster.ledger().scalars_moved();
    m.scalars_up = cluster.ledger().scalars_up;
    m.scalars_down = cluster.ledger().scalars_down;
    if (opts.test) {
      const auto ev = evaluate(spec, v, *opts.test, opts.eval_phi ? &cluster.data() : nullptr);
      m.test_auc = ev.test_auc;
      m.empirical_phi = ev.empirical_phi;
    }
    return m;
  };

  for (std::size_t s = 1; s <= cfg.S; ++s) {
    const auto sched = build_schedule(cfg, s);
    DsgConfig dsg;
    dsg.eta = sched.eta;
    dsg.T = sched.T;
    dsg.I = sched.I;
    dsg.gamma = cfg.gamma();
    dsg.anchor_v0 = v_prev;
    dsg.alpha0 = alpha_prev;
    dsg.minibatch = cfg.minibatch;

    DsgOptions dopts;
    dopts.seed = cfg.seed;
    dopts.stage = s;
    dopts.threads = opts.threads;
    const std::uint64_t iters_before = result.iterations;
    const bool mid_eval = opts.eval_every > 0 && opts.test != nullptr;
    if (mid_eval || opts.inner_observer) {
      std::size_t every = 0;
      if (mid_eval && opts.inner_observer) {
        every = std::gcd(opts.eval_every, std::max<std::size_t>(1, opts.inner_observe_every));
      } else {
        every = mid_eval ? opts.eval_every : std::max<std::size_t>(1, opts.inner_observe_every);
      }
      dopts.observe_every = every;
      dopts.observer = [&, s, iters_before](std::size_t t, std::span<const WorkerState> workers) {
        if (opts.inner_observer && opts.inner_observe_every > 0 && t % opts.inner_observe_every == 0) {
          opts.inner_observer(s, t, workers);
        }
        if (mid_eval && t % opts.eval_every == 0 && t < sched.T) {
          PrimalPoint mean = workers[0].v;
          for (std::size_t k = 1; k < workers.size(); ++k) {
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += workers[k].v[i];
          }
          if (workers.size() > 1) {
            for (auto& x : mean.flat()) x /= static_cast<double>(workers.size());
          }
          emit(snapshot("eval", s, iters_before + t, mean));
        }
      };
    }

    auto out = run_dsg(cluster, spec, dsg, constants, dopts);
    result.iterations += sched.T;
    const double alpha_s = restart_alpha(cluster, spec, out.v_tilde, sched.m, cfg.seed, s);
    log::debug("stage " + std::to_string(s) + ": eta=" + std::to_string(sched.eta) + " T=" +
               std::to_string(sched.T) + " I=" + std::to_string(sched.I) + " m=" + std::to_string(sched.m) +
               " alpha=" + std::to_string(alpha_s));

    emit(snapshot("stage", s, result.iterations, out.v_tilde));
    result.stages.push_back({sched, out.v_tilde, alpha_s});
    v_prev = std::move(out.v_tilde);
    alpha_prev = alpha_s;
  }

  result.v = std::move(v_prev);
  result.ledger = cluster.ledger();
  return result;
}

}  // namespace coda
