#include "coda/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "coda/error.hpp"
#include "coda/rng.hpp"

namespace coda {
namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_index(std::string_view tok, std::size_t& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Raw labels are mapped after the whole file is read so {0,1} and {-1,+1}
// files are both accepted but a mixed {-1,0,1} file is not.
int map_labels(std::vector<double>& raw, const std::string& source) {
  bool has_zero = false, has_neg = false;
  for (double y : raw) {
    if (y == 0.0) has_zero = true;
    if (y == -1.0) has_neg = true;
  }
  if (has_zero && has_neg) {
    throw Error(source + ": labels mix 0 and -1; expected {-1,+1} or {0,1}");
  }
  return has_zero ? 0 : -1;
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_ws(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

std::vector<Sample> finish_labels(std::vector<std::vector<double>>&& rows, std::vector<double>& raw,
                                  const std::vector<std::size_t>& line_of, const std::string& source) {
  const int negative_code = map_labels(raw, source);
  std::vector<Sample> samples;
  samples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int label;
    if (raw[i] == 1.0) {
      label = 1;
    } else if (raw[i] == static_cast<double>(negative_code)) {
      label = -1;
    } else {
      throw ParseError(source, line_of[i], 1, "label must be one of {-1,+1} or {0,1}");
    }
    samples.push_back({std::move(rows[i]), label});
  }
  return samples;
}

void require_both_classes(const std::vector<Sample>& samples, const std::string& source) {
  const auto pos = std::count_if(samples.begin(), samples.end(),
                                 [](const Sample& s) { return s.label == 1; });
  if (pos == 0 || static_cast<std::size_t>(pos) == samples.size()) {
    throw Error(source + ": single-class data; both labels are required");
  }
}

}  // namespace

Dataset::Dataset(std::vector<Sample> samples, std::size_t dim)
    : samples_(std::move(samples)), dim_(dim) {
  if (dim_ == 0) throw Error("dataset dimension must be >= 1");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.features.size() != dim_) {
      throw Error("sample " + std::to_string(i) + " has " + std::to_string(s.features.size()) +
                  " features, expected " + std::to_string(dim_));
    }
    if (s.label != 1 && s.label != -1) {
      throw Error("sample " + std::to_string(i) + " label must be +1 or -1");
    }
    for (double x : s.features) {
      if (!std::isfinite(x)) throw Error("sample " + std::to_string(i) + " has a non-finite feature");
    }
    if (s.label == 1) ++num_positive_;
  }
  if (num_positive_ == 0 || num_positive_ == samples_.size()) {
    throw Error("dataset must contain at least one sample of each label");
  }
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples_.at(i));
  return Dataset(std::move(out), dim_);
}

std::size_t ShardAssignment::min_shard_size() const {
  std::size_t m = std::numeric_limits<std::size_t>::max();
  for (const auto& s : worker_shards) m = std::min(m, s.size());
  return worker_shards.empty() ? 0 : m;
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<std::size_t> dim_hint) {
  const std::string source = path.string();
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + source);

  struct Entry {
    std::size_t index;
    double value;
  };
  std::vector<std::vector<Entry>> sparse;
  std::vector<double> raw_labels;
  std::vector<std::size_t> line_of;
  std::size_t max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    double y;
    if (!parse_double(tokens[0].text, y)) {
      throw ParseError(source, lineno, tokens[0].column, "invalid label '" + std::string(tokens[0].text) + "'");
    }
    if (y != 1.0 && y != -1.0 && y != 0.0) {
      throw ParseError(source, lineno, tokens[0].column, "label must be one of {-1,+1} or {0,1}");
    }
    std::vector<Entry> row;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t].text;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(source, lineno, tokens[t].column, "expected index:value, got '" + std::string(tok) + "'");
      }
      std::size_t idx;
      if (!parse_index(tok.substr(0, colon), idx) || idx == 0) {
        throw ParseError(source, lineno, tokens[t].column, "feature index must be a positive integer");
      }
      double val;
      if (!parse_double(tok.substr(colon + 1), val) || !std::isfinite(val)) {
        throw ParseError(source, lineno, tokens[t].column + colon + 1, "invalid feature value");
      }
      max_index = std::max(max_index, idx);
      row.push_back({idx, val});
    }
    sparse.push_back(std::move(row));
    raw_labels.push_back(y);
    line_of.push_back(lineno);
  }
  if (sparse.empty()) throw Error(source + ": no samples");

  std::size_t dim = max_index;
  if (dim_hint) {
    if (*dim_hint < max_index) {
      throw Error(source + ": dim_hint " + std::to_string(*dim_hint) + " is smaller than max index " +
                  std::to_string(max_index));
    }
    dim = *dim_hint;
  }
  if (dim == 0) throw Error(source + ": no features and no dim_hint");

  std::vector<std::vector<double>> rows;
  rows.reserve(sparse.size());
  for (const auto& sp : sparse) {
    std::vector<double> dense(dim, 0.0);
    for (const auto& e : sp) dense[e.index - 1] = e.value;
    rows.push_back(std::move(dense));
  }
  auto samples = finish_labels(std::move(rows), raw_labels, line_of, source);
  require_both_classes(samples, source);
  return Dataset(std::move(samples), dim);
}

Dataset load_csv(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + source);

  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ncols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    break;
  }
  if (ncols < 2) throw Error(source + ": header must name at least one feature and the label");

  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  std::vector<std::size_t> line_of;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      double v;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError(source, lineno, start + 1, "invalid number '" + std::string(cell) + "'");
      }
      values.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (values.size() != ncols) {
      throw ParseError(source, lineno, 1,
                       "expected " + std::to_string(ncols) + " columns, got " + std::to_string(values.size()));
    }
    const double y = values.back();
    if (y != 1.0 && y != -1.0 && y != 0.0) {
      throw ParseError(source, lineno, line.rfind(',') + 2, "label must be one of {-1,+1} or {0,1}");
    }
    values.pop_back();
    rows.push_back(std::move(values));
    raw_labels.push_back(y);
    line_of.push_back(lineno);
  }
  if (rows.empty()) throw Error(source + ": no samples");
  auto samples = finish_labels(std::move(rows), raw_labels, line_of, source);
  require_both_classes(samples, source);
  return Dataset(std::move(samples), ncols - 1);
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::size_t> dim_hint) {
  if (path.extension() == ".csv") return load_csv(path);
  return load_libsvm(path, dim_hint);
}

Dataset synth_gaussians(std::size_t n, std::size_t d, double p, double separation, std::uint64_t seed) {
  if (n < 2) throw Error("synth_gaussians: n must be >= 2");
  if (d < 1) throw Error("synth_gaussians: d must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw Error("synth_gaussians: p must lie in (0,1)");
  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * p));
  if (n_pos == 0 || n_pos == n) {
    throw Error("synth_gaussians: round(n*p) = " + std::to_string(n_pos) + " leaves a class empty");
  }

  Engine eng(derive_seed(seed, 0, 0, StreamKind::synth));
  std::vector<int> labels(n, -1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  fisher_yates(labels, eng);

  const double shift = separation / std::sqrt(static_cast<double>(d));
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].label = labels[i];
    samples[i].features.resize(d);
    const double mean = labels[i] == 1 ? shift : -shift;
    for (auto& x : samples[i].features) x = mean + standard_normal(eng);
  }
  return Dataset(std::move(samples), d);
}

Dataset rebalance(const Dataset& ds, double target_p, std::uint64_t seed) {
  const double p = ds.positive_ratio();
  if (!(target_p > p)) {
    std::ostringstream msg;
    msg << "rebalance: target_p=" << target_p << " must exceed the current positive ratio " << p
        << " (only negatives can be dropped)";
    throw Error(msg.str());
  }
  if (!(target_p < 1.0)) throw Error("rebalance: target_p must be < 1");

  const double pos = static_cast<double>(ds.num_positive());
  const auto keep = static_cast<std::size_t>(std::llround(pos * (1.0 - target_p) / target_p));
  if (keep == 0) throw Error("rebalance: target_p would drop every negative sample");
  if (keep >= ds.num_negative()) return ds;

  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].label == -1) negatives.push_back(i);
  }
  Engine eng(derive_seed(seed, 0, 0, StreamKind::rebalance));
  fisher_yates(negatives, eng);
  std::vector<bool> kept(ds.size(), false);
  for (std::size_t i = 0; i < ds.size(); ++i) kept[i] = ds[i].label == 1;
  for (std::size_t j = 0; j < keep; ++j) kept[negatives[j]] = true;

  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (kept[i]) indices.push_back(i);
  }
  return ds.select(indices);
}

ShardAssignment shard(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (k < 1) throw Error("shard: k must be >= 1");
  if (k > n) throw Error("shard: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Engine eng(derive_seed(seed, 0, 0, StreamKind::shard));
  fisher_yates(perm, eng);

  ShardAssignment out;
  out.seed = seed;
  out.worker_shards.resize(k);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    out.worker_shards[w].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                                perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("train_test_split: test_fraction must lie in (0,1)");
  }
  std::vector<std::size_t> perm(ds.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Engine eng(derive_seed(seed, 1, 0, StreamKind::shard));
  fisher_yates(perm, eng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ds.size())));
  if (n_test == 0 || n_test == ds.size()) throw Error("train_test_split: split leaves one side empty");
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {ds.select(train), ds.select(test)};
}

}  // namespace coda
