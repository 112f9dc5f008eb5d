#include <random>
#include <vector>

#include "doctest.h"
#include "support.hpp"

#include "coda/cluster.hpp"
#include "coda/error.hpp"
#include "coda/log.hpp"

using namespace coda;

namespace {

ClusterSim make_cluster(std::size_t K, std::size_t n = 40) {
  auto ds = testing::small_dataset(n, 2, 0.5, 1);
  auto sh = shard(ds, K, 2);
  return ClusterSim(std::move(ds), std::move(sh));
}

}  // namespace

TEST_CASE("averaging a single worker is a no-op but costs a round") {
  auto c = make_cluster(1);
  c.reset_workers(PrimalPoint({1.0, 2.0, 3.0}, 0.5, -0.5), 0.25, 0, 1);
  const auto before = c.workers()[0].v;
  c.average_primal_dual();
  CHECK(c.workers()[0].v == before);
  CHECK(c.workers()[0].alpha == 0.25);
  CHECK(c.ledger().rounds == 1);
  CHECK(c.ledger().scalars_up == 6);
  CHECK(c.ledger().scalars_down == 6);
}

TEST_CASE("two opposite workers average to zero") {
  auto c = make_cluster(2);
  c.reset_workers(PrimalPoint(3), 0.0, 0, 1);
  c.workers()[0].v[1] = 1.0;
  c.workers()[1].v[1] = -1.0;
  c.workers()[0].alpha = 2.0;
  c.workers()[1].alpha = -2.0;
  c.average_primal_dual();
  for (const auto& w : c.workers()) {
    CHECK(w.v[1] == 0.0);
    CHECK(w.alpha == 0.0);
  }
}

TEST_CASE("K=4 averaging equals a brute-force mean") {
  std::mt19937_64 eng(3);
  auto c = make_cluster(4);
  c.reset_workers(PrimalPoint(3), 0.0, 0, 1);
  for (auto& w : c.workers()) {
    w.v = PrimalPoint::from_flat(testing::random_vector(eng, 5));
    w.alpha = testing::random_vector(eng, 1)[0];
  }
  std::vector<double> mean(5, 0.0);
  double alpha = 0.0;
  for (const auto& w : c.workers()) {
    for (std::size_t i = 0; i < 5; ++i) mean[i] += w.v[i] / 4.0;
    alpha += w.alpha / 4.0;
  }
  c.average_primal_dual();
  for (const auto& w : c.workers()) {
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(w.v[i] - mean[i]) <= 1e-15);
    CHECK(std::abs(w.alpha - alpha) <= 1e-15);
  }
  CHECK(c.ledger().scalars_up == 4 * 6);
}

TEST_CASE("barrier violation is detected") {
  auto c = make_cluster(2);
  c.reset_workers(PrimalPoint(3), 0.0, 0, 1);
  c.workers()[1].local_steps = 1;
  CHECK_THROWS_AS(c.average_primal_dual(), Error);
}

TEST_CASE("aggregate_restart") {
  auto c = make_cluster(2);
  SUBCASE("mean of two worker terms") {
    // terms 0.8-0.3 = 0.5 and 0.9-0.2 = 0.7
    std::vector<RestartStats> s{{1.6, 2, 0.9, 3}, {0.9, 1, 0.4, 2}};
    CHECK(c.aggregate_restart(s) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(c.ledger().rounds == 1);
    CHECK(c.ledger().scalars_up == 8);
    CHECK(c.ledger().scalars_down == 2);
  }
  SUBCASE("worker without negatives is left out of that term") {
    log::set_level(log::Level::error);
    std::vector<RestartStats> s{{0.0, 0, 0.6, 2}, {0.9, 1, 0.4, 2}};
    CHECK(c.aggregate_restart(s) == doctest::Approx(0.9 - 0.25).epsilon(1e-15));
    log::set_level(log::Level::info);
  }
  SUBCASE("no negatives anywhere is fatal") {
    log::set_level(log::Level::off);
    std::vector<RestartStats> s{{0.0, 0, 0.6, 2}, {0.0, 0, 0.4, 2}};
    CHECK_THROWS_AS(c.aggregate_restart(s), Error);
    CHECK(c.ledger().rounds == 0);
    log::set_level(log::Level::info);
  }
}

TEST_CASE("reset seeds each worker from its own stream") {
  auto c = make_cluster(3);
  c.reset_workers(PrimalPoint(3), 0.0, 9, 2);
  const auto a = c.workers()[0].rng();
  const auto b = c.workers()[1].rng();
  CHECK(a != b);
  c.reset_workers(PrimalPoint(3), 0.0, 9, 2);
  CHECK(c.workers()[0].rng() == a);
}

TEST_CASE("empty shards are rejected") {
  auto ds = testing::small_dataset(10, 1, 0.5, 1);
  ShardAssignment sh;
  sh.worker_shards = {{0, 1, 2}, {}};
  CHECK_THROWS_AS(ClusterSim(ds, sh), Error);
}
