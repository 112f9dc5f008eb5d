#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"

#include "coda/data.hpp"
#include "coda/error.hpp"

using namespace coda;

namespace {

struct TempFile {
  std::filesystem::path path;
  TempFile(const std::string& name, const std::string& text)
      : path(std::filesystem::temp_directory_path() / ("coda_test_" + name)) {
    std::ofstream(path) << text;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("libsvm: two-line file with dim hint") {
  TempFile f("two.svm", "+1 1:0.5\n-1 2:1.0\n");
  const auto ds = load_libsvm(f.path, 2);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.positive_ratio() == 0.5);
  CHECK(ds[0].label == 1);
  CHECK(ds[0].features == std::vector<double>{0.5, 0.0});
  CHECK(ds[1].features == std::vector<double>{0.0, 1.0});
}

TEST_CASE("libsvm: {0,1} labels map to {-1,+1}") {
  TempFile f("zero_one.svm", "0 1:1\n1 1:2\n1 2:3\n# comment\n");
  const auto ds = load_libsvm(f.path);
  REQUIRE(ds.size() == 3);
  CHECK(ds[0].label == -1);
  CHECK(ds[1].label == 1);
  CHECK(ds[2].label == 1);
  CHECK(ds.dim() == 2);
}

TEST_CASE("libsvm: 1000-line file recount") {
  std::ostringstream text;
  std::uint64_t state = 12345;
  for (int i = 0; i < 1000; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    const bool pos = (state >> 33) % 10 < 3;
    text << (pos ? "+1" : "-1") << " " << (i % 7 + 1) << ":" << (i % 13) * 0.25 << " 9:1\n";
  }
  TempFile f("thousand.svm", text.str());

  std::ifstream in(f.path);
  std::string line;
  int lines = 0, positives = 0;
  while (std::getline(in, line)) {
    ++lines;
    if (line.rfind("+1", 0) == 0) ++positives;
  }
  const auto ds = load_libsvm(f.path);
  CHECK(ds.size() == static_cast<std::size_t>(lines));
  CHECK(ds.size() == 1000);
  CHECK(ds.positive_ratio() == static_cast<double>(positives) / 1000.0);
}

TEST_CASE("libsvm: malformed input reports line and column") {
  TempFile f("bad.svm", "+1 1:0.5\n-1 2:abc\n");
  try {
    load_libsvm(f.path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
  }
  TempFile g("badlabel.svm", "+1 1:0.5\n3 1:1\n");
  CHECK_THROWS_AS(load_libsvm(g.path), ParseError);
  TempFile h("single.svm", "+1 1:0.5\n+1 1:1\n");
  CHECK_THROWS_AS(load_libsvm(h.path), Error);
  TempFile m("mixed.svm", "0 1:0.5\n-1 1:1\n1 1:1\n");
  CHECK_THROWS_AS(load_libsvm(m.path), Error);
  TempFile s("small_hint.svm", "+1 3:0.5\n-1 1:1\n");
  CHECK_THROWS_AS(load_libsvm(s.path, 2), Error);
}

TEST_CASE("csv loader") {
  TempFile f("data.csv", "x1,x2,label\n0.5,1.0,1\n-0.5,2.0,0\n");
  const auto ds = load_dataset(f.path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds[1].label == -1);
  CHECK(ds[1].features == std::vector<double>{-0.5, 2.0});
  TempFile g("bad.csv", "x1,label\n0.5,1\nfoo,0\n");
  CHECK_THROWS_AS(load_dataset(g.path), ParseError);
}

TEST_CASE("synth_gaussians: exact positive count and determinism") {
  const auto ds = synth_gaussians(10, 3, 0.5, 1.0, 7);
  CHECK(ds.num_positive() == 5);
  const auto big = synth_gaussians(1001, 4, 0.71, 2.0, 7);
  CHECK(big.num_positive() == 711);
  const auto again = synth_gaussians(1001, 4, 0.71, 2.0, 7);
  for (std::size_t i = 0; i < big.size(); ++i) {
    CHECK(big[i].label == again[i].label);
    CHECK(big[i].features == again[i].features);
  }
  CHECK_THROWS_AS(synth_gaussians(10, 3, 0.01, 1.0, 7), Error);
}

TEST_CASE("synth_gaussians: class means sit at +-separation/sqrt(d)") {
  const std::size_t n = 20000, d = 4;
  const auto ds = synth_gaussians(n, d, 0.5, 2.0, 3);
  std::vector<double> mean_pos(d, 0.0), mean_neg(d, 0.0);
  for (const auto& z : ds.samples()) {
    auto& m = z.label == 1 ? mean_pos : mean_neg;
    for (std::size_t j = 0; j < d; ++j) m[j] += z.features[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    // standard error of a mean of 10000 unit normals is 0.01
    CHECK(std::abs(mean_pos[j] / 10000.0 - 1.0) < 0.05);
    CHECK(std::abs(mean_neg[j] / 10000.0 + 1.0) < 0.05);
  }
}

TEST_CASE("rebalance") {
  const auto ds = synth_gaussians(1000, 2, 0.5, 1.0, 11);

  SUBCASE("target 0.8 keeps 125 negatives") {
    const auto out = rebalance(ds, 0.8, 5);
    CHECK(out.num_positive() == 500);
    CHECK(out.num_negative() == 125);
    CHECK(out.positive_ratio() == doctest::Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("keeping 40% of negatives gives 0.714") {
    const auto out = rebalance(ds, 0.714, 5);
    CHECK(out.num_negative() == 200);
    CHECK(out.positive_ratio() == doctest::Approx(0.5 / 0.7).epsilon(1e-15));
  }
  SUBCASE("sub-granularity target leaves the data unchanged") {
    const auto out = rebalance(ds, 0.5 + 1e-5, 5);
    CHECK(out.size() == ds.size());
  }
  SUBCASE("row order preserved") {
    const auto out = rebalance(ds, 0.8, 5);
    std::size_t j = 0;
    for (std::size_t i = 0; i < ds.size() && j < out.size(); ++i) {
      if (ds[i].features == out[j].features) ++j;
    }
    CHECK(j == out.size());
  }
  SUBCASE("invalid targets") {
    CHECK_THROWS_AS(rebalance(ds, 0.4, 5), Error);
    CHECK_THROWS_AS(rebalance(ds, 1.0, 5), Error);
    CHECK_THROWS_AS(rebalance(ds, 0.9995, 5), Error);
  }
}

TEST_CASE("shard: sizes and partition property") {
  const auto ds4 = synth_gaussians(4, 1, 0.5, 1.0, 1);
  const auto s4 = shard(ds4, 2, 9);
  REQUIRE(s4.num_workers() == 2);
  CHECK(s4.worker_shards[0].size() == 2);
  CHECK(s4.worker_shards[1].size() == 2);

  const auto ds10 = synth_gaussians(10, 1, 0.5, 1.0, 1);
  const auto s10 = shard(ds10, 3, 9);
  CHECK(s10.worker_shards[0].size() == 4);
  CHECK(s10.worker_shards[1].size() == 3);
  CHECK(s10.worker_shards[2].size() == 3);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = synth_gaussians(97 + seed, 1, 0.5, 1.0, seed);
    const std::size_t k = 1 + seed % 7;
    const auto sh = shard(ds, k, seed);
    std::set<std::size_t> seen;
    std::size_t total = 0, lo = ds.size(), hi = 0;
    for (const auto& s : sh.worker_shards) {
      seen.insert(s.begin(), s.end());
      total += s.size();
      lo = std::min(lo, s.size());
      hi = std::max(hi, s.size());
    }
    CHECK(total == ds.size());
    CHECK(seen.size() == ds.size());
    CHECK(*seen.rbegin() == ds.size() - 1);
    CHECK(hi - lo <= 1);
  }

  const auto one = shard(ds10, 1, 4);
  auto sorted = one.worker_shards[0];
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(10);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);

  CHECK(shard(ds10, 3, 9).worker_shards == s10.worker_shards);
  CHECK_THROWS_AS(shard(ds10, 11, 9), Error);
}

TEST_CASE("train_test_split keeps both classes and partitions rows") {
  const auto ds = synth_gaussians(500, 3, 0.3, 1.0, 2);
  const auto [train, test] = train_test_split(ds, 0.2, 4);
  CHECK(test.size() == 100);
  CHECK(train.size() == 400);
  CHECK(train.num_positive() + test.num_positive() == ds.num_positive());
}

TEST_CASE("Dataset validation") {
  CHECK_THROWS_AS(Dataset({{{1.0}, 1}}, 1), Error);
  CHECK_THROWS_AS(Dataset({{{1.0}, 1}, {{1.0, 2.0}, -1}}, 1), Error);
  CHECK_THROWS_AS(Dataset({{{1.0}, 1}, {{std::nan("")}, -1}}, 1), Error);
  CHECK_THROWS_AS(Dataset({{{1.0}, 2}, {{1.0}, -1}}, 1), Error);
}
