#include "coda/runner.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "coda/cluster.hpp"
#include "coda/coda.hpp"
#include "coda/data.hpp"
#include "coda/error.hpp"
#include "coda/log.hpp"
#include "coda/metrics.hpp"
#include "coda/scorer.hpp"

namespace coda {
namespace {

using nlohmann::json;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }

json metrics_record(const RunMetrics& m, const std::string& hash, const std::string& tag) {
  json j;
  j["type"] = "metrics";
  j["config_hash"] = hash;
  if (!tag.empty()) j["tag"] = tag;
  j["kind"] = m.kind;
  j["stage"] = m.stage;
  j["cumulative_iterations"] = m.cumulative_iterations;
  j["cumulative_rounds"] = m.cumulative_rounds;
  j["scalars_moved"] = m.scalars_moved;
  j["ledger"] = {{"rounds", m.cumulative_rounds}, {"scalars_up", m.scalars_up}, {"scalars_down", m.scalars_down}};
  j["test_auc"] = m.test_auc;
  j["empirical_phi"] = optional_json(m.empirical_phi);
  j["wall_seconds"] = optional_json(m.wall_seconds);
  return j;
}

// Canonical config text without the keys that cannot change the metrics, so
// that reruns with another output path or thread count are byte-identical.
std::string recorded_config(const RunConfig& cfg) {
  std::istringstream in(serialize_config(cfg));
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("output =", 0) == 0 || line.rfind("threads =", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

struct PreparedData {
  Dataset train;
  Dataset test;
};

PreparedData prepare_data(const RunConfig& cfg) {
  if (cfg.source == "synthetic") {
    auto train = synth_gaussians(cfg.synth_n, cfg.synth_dim, cfg.synth_p, cfg.separation, cfg.seed);
    auto test = synth_gaussians(cfg.test_n, cfg.synth_dim, cfg.synth_p, cfg.separation,
                                derive_seed(cfg.seed, 0, 1, StreamKind::synth));
    if (cfg.target_p) train = rebalance(train, *cfg.target_p, cfg.seed);
    return {std::move(train), std::move(test)};
  }
  auto full = load_dataset(cfg.source, cfg.dim_hint);
  if (cfg.test_path) {
    auto test = load_dataset(*cfg.test_path, full.dim());
    if (test.dim() != full.dim()) throw Error("test set dimension differs from training set");
    if (cfg.target_p) full = rebalance(full, *cfg.target_p, cfg.seed);
    return {std::move(full), std::move(test)};
  }
  auto [train, test] = train_test_split(full, cfg.test_fraction, cfg.seed);
  if (cfg.target_p) train = rebalance(train, *cfg.target_p, cfg.seed);
  return {std::move(train), std::move(test)};
}

}  // namespace

std::string summary_line(const RunSummary& s) {
  std::ostringstream os;
  os << (s.tag.empty() ? std::string("run") : s.tag) << ": final_auc=" << std::fixed << std::setprecision(6)
     << s.final_auc << " rounds=" << s.total_rounds << " iterations=" << s.total_iterations
     << " scalars=" << s.scalars_moved;
  if (s.iterations_to_target) {
    os << " iters_to_target=" << *s.iterations_to_target << " rounds_to_target=" << *s.rounds_to_target;
  }
  os << " hash=" << s.config_hash;
  return os.str();
}

RunSummary run_experiment(const RunConfig& cfg, std::ostream& out) {
  const std::string hash = config_hash(cfg);
  auto write = [&](const json& j) {
    out << j.dump() << '\n';
    out.flush();
  };

  json header;
  header["type"] = "config";
  header["config_hash"] = hash;
  if (!cfg.tag.empty()) header["tag"] = cfg.tag;
  header["config"] = recorded_config(cfg);
  write(header);

  auto data = prepare_data(cfg);
  const double p = data.train.positive_ratio();
  const std::size_t K = cfg.workers;
  ClusterSim cluster(data.train, shard(data.train, K, cfg.seed));

  ScorerSpec spec{cfg.scorer, data.train.dim(), cfg.hidden};
  spec.validate();
  const auto params0 = initial_params(spec, cfg.seed);

  double G_h;
  if (cfg.G_h) {
    G_h = *cfg.G_h;
  } else {
    const auto bound = lipschitz_bound(spec, data.train, params0);
    G_h = bound.value;
    if (!bound.uniform) log::warn("G_h=" + std::to_string(G_h) + " depends on the initial weights; not a uniform bound");
  }
  double L_v;
  if (cfg.L_v) {
    L_v = *cfg.L_v;
  } else {
    const double L_h = smoothness_bound(spec, data.train, params0).value;
    L_v = std::max(analytic_grad_lipschitz(p, G_h, L_h), 1.0);
  }
  log::info("p=" + std::to_string(p) + " G_h=" + std::to_string(G_h) + " L_v=" + std::to_string(L_v) +
            " mu=" + std::to_string(cfg.mu));

  CodaConfig cc;
  cc.K = K;
  cc.S = cfg.stages;
  cc.eta0 = cfg.eta0;
  cc.L_v = L_v;
  cc.mu = cfg.mu;
  cc.G_h = G_h;
  cc.p = p;
  cc.eta_cap = cfg.eta_cap.value_or(0.0);
  cc.seed = cfg.seed;
  cc.mode = cfg.schedule;
  cc.T0 = cfg.T0;
  cc.comm_interval = cfg.theorem_intervals ? 0 : cfg.comm_interval;
  cc.restart_batch = cfg.restart_batch.value_or(0);
  cc.minibatch = cfg.minibatch;

  RunSummary summary;
  summary.tag = cfg.tag;
  summary.config_hash = hash;
  summary.p = p;
  summary.G_h = G_h;
  summary.L_v = L_v;

  CodaOptions opts;
  opts.test = &data.test;
  opts.eval_every = cfg.eval_every;
  opts.eval_phi = cfg.eval_phi;
  opts.threads = cfg.threads;
  opts.record_wall_time = cfg.record_wall_time;
  opts.v0 = PrimalPoint(params0, 0.0, 0.0);
  opts.on_metrics = [&](const RunMetrics& m) {
    write(metrics_record(m, hash, cfg.tag));
    if (cfg.target_auc && !summary.iterations_to_target && m.test_auc >= *cfg.target_auc) {
      summary.iterations_to_target = m.cumulative_iterations;
      summary.rounds_to_target = m.cumulative_rounds;
    }
  };

  const auto result = run_coda(cc, cluster, spec, opts);
  summary.final_auc = result.metrics.empty() ? 0.5 : result.metrics.back().test_auc;
  summary.total_rounds = result.ledger.rounds;
  summary.total_iterations = result.iterations;
  summary.scalars_moved = result.ledger.scalars_moved();

  json tail;
  tail["type"] = "summary";
  tail["config_hash"] = hash;
  if (!cfg.tag.empty()) tail["tag"] = cfg.tag;
  tail["algorithm"] = std::string(to_string(cfg.algorithm));
  tail["final_auc"] = summary.final_auc;
  tail["total_rounds"] = summary.total_rounds;
  tail["total_iterations"] = summary.total_iterations;
  tail["scalars_moved"] = summary.scalars_moved;
  tail["iterations_to_target"] = optional_json(summary.iterations_to_target);
  tail["rounds_to_target"] = optional_json(summary.rounds_to_target);
  tail["p"] = p;
  tail["G_h"] = G_h;
  tail["L_v"] = L_v;
  write(tail);
  return summary;
}

RunSummary run_experiment(const RunConfig& cfg) {
  const std::filesystem::path path(cfg.output);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open output " + cfg.output);
  return run_experiment(cfg, out);
}

SweepAxis parse_sweep_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw Error("--vary expects key=v1,v2,..., got '" + spec + "'");
  }
  SweepAxis axis;
  axis.key = spec.substr(0, eq);
  std::stringstream rest(spec.substr(eq + 1));
  std::string v;
  while (std::getline(rest, v, ',')) {
    if (v.empty()) throw Error("--vary: empty value in '" + spec + "'");
    axis.values.push_back(v);
  }
  return axis;
}

std::vector<RunSummary> run_sweep(const std::string& config_text, const ConfigOverrides& base_overrides,
                                  const SweepAxis& axis, bool parallel, const std::string& source) {
  std::vector<RunConfig> configs;
  for (const auto& value : axis.values) {
    auto overrides = base_overrides;
    overrides[axis.key] = value;
    auto cfg = parse_config(config_text, overrides, source);
    cfg.tag = axis.key + "=" + value;
    const std::filesystem::path out(cfg.output);
    cfg.output = (out.parent_path() / (out.stem().string() + "." + cfg.tag + out.extension().string())).string();
    configs.push_back(std::move(cfg));
  }

  std::vector<RunSummary> runs;
  if (parallel) {
    std::vector<std::future<RunSummary>> futures;
    for (const auto& cfg : configs) {
      futures.push_back(std::async(std::launch::async, [cfg] { return run_experiment(cfg); }));
    }
    for (auto& f : futures) runs.push_back(f.get());
  } else {
    for (const auto& cfg : configs) runs.push_back(run_experiment(cfg));
  }
  return runs;
}

void print_sweep_table(std::ostream& os, const SweepAxis& axis, const std::vector<RunSummary>& runs) {
  os << std::left << std::setw(20) << axis.key << std::right << std::setw(12) << "final_auc" << std::setw(12)
     << "rounds" << std::setw(14) << "iterations" << std::setw(16) << "iters_to_tgt" << std::setw(16)
     << "rounds_to_tgt" << '\n';
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    os << std::left << std::setw(20) << axis.values.at(i) << std::right << std::setw(12) << std::fixed
       << std::setprecision(6) << r.final_auc << std::setw(12) << r.total_rounds << std::setw(14)
       << r.total_iterations << std::setw(16)
       << (r.iterations_to_target ? std::to_string(*r.iterations_to_target) : std::string("-")) << std::setw(16)
       << (r.rounds_to_target ? std::to_string(*r.rounds_to_target) : std::string("-")) << '\n';
  }
}

}  // namespace coda
