#include "coda/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "coda/error.hpp"
#include "coda/log.hpp"

namespace coda {
namespace {

const std::vector<std::string> kKeys = {
    "source",     "test_path", "synth_n",       "synth_dim",   "synth_p",      "separation",
    "test_n",     "test_fraction", "dim_hint",  "target_p",    "scorer",       "hidden",
    "algorithm",  "workers",   "stages",        "eta0",        "T0",           "comm_interval",
    "schedule",   "theorem_intervals", "L_v",   "mu",          "G_h",          "eta_cap",
    "minibatch",  "restart_batch", "seed",      "eval_every",  "eval_phi",     "threads",
    "output",     "target_auc", "record_wall_time", "tag",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

struct Entry {
  std::string value;
  std::size_t line = 0;  // 0 for command-line overrides
};

class Resolver {
 public:
  Resolver(std::map<std::string, Entry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& def) {
    if (auto it = entries_.find(key); it != entries_.end()) return it->second.value;
    defaulted(key, def);
    return def;
  }

  std::optional<std::string> opt_str(const std::string& key) {
    if (auto it = entries_.find(key); it != entries_.end()) return it->second.value;
    return std::nullopt;
  }

  double real(const std::string& key, double def) {
    if (!has(key)) {
      defaulted(key, format_double(def));
      return def;
    }
    return parse_real(key);
  }

  std::optional<double> opt_real(const std::string& key) {
    if (!has(key)) {
      defaulted(key, "auto");
      return std::nullopt;
    }
    return parse_real(key);
  }

  std::uint64_t integer(const std::string& key, std::uint64_t def) {
    if (!has(key)) {
      defaulted(key, std::to_string(def));
      return def;
    }
    return parse_integer(key);
  }

  std::optional<std::uint64_t> opt_integer(const std::string& key) {
    if (!has(key)) {
      defaulted(key, "auto");
      return std::nullopt;
    }
    return parse_integer(key);
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) {
      defaulted(key, def ? "true" : "false");
      return def;
    }
    const auto& v = entries_.at(key).value;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(key, "expected true/false, got '" + v + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    if (it != entries_.end() && it->second.line > 0) throw ParseError(source_, it->second.line, 1, key + ": " + what);
    throw Error(source_ + ": " + key + ": " + what);
  }

 private:
  double parse_real(const std::string& key) {
    const auto& v = entries_.at(key).value;
    double out;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected a number, got '" + v + "'");
    return out;
  }

  std::uint64_t parse_integer(const std::string& key) {
    const auto& v = entries_.at(key).value;
    std::uint64_t out;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail(key, "expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  void defaulted(const std::string& key, const std::string& value) {
    log::info("config default: " + key + " = " + value);
  }

  std::map<std::string, Entry> entries_;
  std::string source_;
};

std::size_t as_size(std::uint64_t v) { return static_cast<std::size_t>(v); }

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::coda:
      return "coda";
    case Algorithm::np_ppdsg:
      return "np_ppdsg";
    case Algorithm::ppdsg:
      return "ppdsg";
  }
  return "coda";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "coda") return Algorithm::coda;
  if (name == "np_ppdsg") return Algorithm::np_ppdsg;
  if (name == "ppdsg") return Algorithm::ppdsg;
  throw Error("unknown algorithm '" + std::string(name) + "' (expected coda, np_ppdsg or ppdsg)");
}

std::vector<std::string> config_keys() { return kKeys; }

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides, std::string_view source) {
  const std::set<std::string> known(kKeys.begin(), kKeys.end());
  const std::string src(source);
  std::map<std::string, Entry> entries;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(src, lineno, 1, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(src, lineno, 1, "empty key");
    if (!known.count(key)) throw ParseError(src, lineno, 1, "unknown key '" + key + "'");
    if (entries.count(key)) throw ParseError(src, lineno, 1, "duplicate key '" + key + "'");
    if (value.empty()) throw ParseError(src, lineno, eq + 2, "empty value for '" + key + "'");
    entries[key] = {value, lineno};
  }
  for (const auto& [key, value] : overrides) {
    if (!known.count(key)) throw Error("unknown config key '" + key + "' in override");
    entries[key] = {value, 0};
  }

  Resolver r(std::move(entries), src);
  RunConfig c;
  c.source = r.str("source", c.source);
  c.test_path = r.opt_str("test_path");
  c.synth_n = as_size(r.integer("synth_n", c.synth_n));
  c.synth_dim = as_size(r.integer("synth_dim", c.synth_dim));
  c.synth_p = r.real("synth_p", c.synth_p);
  c.separation = r.real("separation", c.separation);
  c.test_n = as_size(r.integer("test_n", c.test_n));
  c.test_fraction = r.real("test_fraction", c.test_fraction);
  if (auto v = r.opt_integer("dim_hint")) c.dim_hint = as_size(*v);
  c.target_p = r.opt_real("target_p");

  c.scorer = parse_scorer_kind(r.str("scorer", std::string(to_string(c.scorer))));
  const bool hidden_given = r.has("hidden");
  c.hidden = as_size(r.integer("hidden", c.scorer == ScorerKind::mlp_sigmoid ? 16 : 0));
  if (c.scorer == ScorerKind::linear_sigmoid && hidden_given && c.hidden != 0) {
    r.fail("hidden", "linear_sigmoid takes no hidden layer");
  }
  if (c.scorer == ScorerKind::mlp_sigmoid && c.hidden == 0) r.fail("hidden", "mlp_sigmoid needs hidden >= 1");

  c.algorithm = parse_algorithm(r.str("algorithm", std::string(to_string(c.algorithm))));
  const bool workers_given = r.has("workers");
  const bool interval_given = r.has("comm_interval");
  c.workers = as_size(r.integer("workers", c.workers));
  c.stages = as_size(r.integer("stages", c.stages));
  c.eta0 = r.real("eta0", c.eta0);
  c.T0 = as_size(r.integer("T0", c.T0));
  c.comm_interval = as_size(r.integer("comm_interval", c.comm_interval));
  c.schedule = parse_schedule_mode(r.str("schedule", std::string(to_string(c.schedule))));
  c.theorem_intervals = r.boolean("theorem_intervals", c.theorem_intervals);
  c.L_v = r.opt_real("L_v");
  c.mu = r.real("mu", c.mu);
  c.G_h = r.opt_real("G_h");
  c.eta_cap = r.opt_real("eta_cap");
  c.minibatch = as_size(r.integer("minibatch", c.minibatch));
  if (auto v = r.opt_integer("restart_batch")) c.restart_batch = as_size(*v);

  c.seed = r.integer("seed", c.seed);
  c.eval_every = as_size(r.integer("eval_every", c.eval_every));
  c.eval_phi = r.boolean("eval_phi", c.eval_phi);
  c.threads = as_size(r.integer("threads", c.threads));
  c.output = r.str("output", c.output);
  c.target_auc = r.opt_real("target_auc");
  c.record_wall_time = r.boolean("record_wall_time", c.record_wall_time);
  c.tag = r.has("tag") ? *r.opt_str("tag") : std::string();

  switch (c.algorithm) {
    case Algorithm::ppdsg:
      if (workers_given && c.workers != 1) r.fail("workers", "ppdsg requires K=1");
      if (interval_given && c.comm_interval != 1) r.fail("comm_interval", "ppdsg requires I=1");
      if (c.theorem_intervals) r.fail("theorem_intervals", "ppdsg requires I=1");
      c.workers = 1;
      c.comm_interval = 1;
      break;
    case Algorithm::np_ppdsg:
      if (interval_given && c.comm_interval != 1) r.fail("comm_interval", "np_ppdsg requires I=1");
      if (c.theorem_intervals) r.fail("theorem_intervals", "np_ppdsg requires I=1");
      c.comm_interval = 1;
      break;
    case Algorithm::coda:
      break;
  }

  if (c.workers < 1) r.fail("workers", "must be >= 1");
  if (c.stages < 1) r.fail("stages", "must be >= 1");
  if (!(c.eta0 > 0.0)) r.fail("eta0", "must be > 0");
  if (c.T0 < 1) r.fail("T0", "must be >= 1");
  if (c.comm_interval < 1) r.fail("comm_interval", "must be >= 1");
  if (c.theorem_intervals && c.schedule != ScheduleMode::theorem) {
    r.fail("theorem_intervals", "only applies to schedule = theorem");
  }
  if (!(c.mu > 0.0 && c.mu <= 1.0)) r.fail("mu", "must lie in (0,1]");
  if (c.L_v && !(*c.L_v > 0.0)) r.fail("L_v", "must be > 0");
  if (c.G_h && !(*c.G_h >= 0.0)) r.fail("G_h", "must be >= 0");
  if (c.eta_cap && !(*c.eta_cap > 0.0)) r.fail("eta_cap", "must be > 0");
  if (c.minibatch < 1) r.fail("minibatch", "must be >= 1");
  if (c.restart_batch && *c.restart_batch < 1) r.fail("restart_batch", "must be >= 1");
  if (c.threads < 1) r.fail("threads", "must be >= 1");
  if (!(c.synth_p > 0.0 && c.synth_p < 1.0)) r.fail("synth_p", "must lie in (0,1)");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) r.fail("test_fraction", "must lie in (0,1)");
  if (c.target_p && !(*c.target_p > 0.0 && *c.target_p < 1.0)) r.fail("target_p", "must lie in (0,1)");
  if (c.target_auc && !(*c.target_auc > 0.0 && *c.target_auc <= 1.0)) r.fail("target_auc", "must lie in (0,1]");
  return c;
}

RunConfig parse_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides, path.string());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto real = [&](const char* key, double v) { kv(key, format_double(v)); };
  auto integer = [&](const char* key, std::uint64_t v) { kv(key, std::to_string(v)); };
  auto boolean = [&](const char* key, bool v) { kv(key, v ? "true" : "false"); };

  kv("source", c.source);
  if (c.test_path) kv("test_path", *c.test_path);
  integer("synth_n", c.synth_n);
  integer("synth_dim", c.synth_dim);
  real("synth_p", c.synth_p);
  real("separation", c.separation);
  integer("test_n", c.test_n);
  real("test_fraction", c.test_fraction);
  if (c.dim_hint) integer("dim_hint", *c.dim_hint);
  if (c.target_p) real("target_p", *c.target_p);
  kv("scorer", std::string(to_string(c.scorer)));
  integer("hidden", c.hidden);
  kv("algorithm", std::string(to_string(c.algorithm)));
  integer("workers", c.workers);
  integer("stages", c.stages);
  real("eta0", c.eta0);
  integer("T0", c.T0);
  integer("comm_interval", c.comm_interval);
  kv("schedule", std::string(to_string(c.schedule)));
  boolean("theorem_intervals", c.theorem_intervals);
  if (c.L_v) real("L_v", *c.L_v);
  real("mu", c.mu);
  if (c.G_h) real("G_h", *c.G_h);
  if (c.eta_cap) real("eta_cap", *c.eta_cap);
  integer("minibatch", c.minibatch);
  if (c.restart_batch) integer("restart_batch", *c.restart_batch);
  integer("seed", c.seed);
  integer("eval_every", c.eval_every);
  boolean("eval_phi", c.eval_phi);
  integer("threads", c.threads);
  kv("output", c.output);
  if (c.target_auc) real("target_auc", *c.target_auc);
  boolean("record_wall_time", c.record_wall_time);
  if (!c.tag.empty()) kv("tag", c.tag);
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  // Output location and thread count do not change results.
  RunConfig canonical = cfg;
  canonical.output.clear();
  canonical.threads = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(canonical)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace coda
