#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace coda {

struct Sample {
  std::vector<double> features;
  int label = 1;  // +1 or -1
};

// Immutable labeled dataset with dense features. Construction validates that
// every row has `dim` finite entries, labels are +-1, and both classes exist.
class Dataset {
 public:
  Dataset(std::vector<Sample> samples, std::size_t dim);

  std::size_t size() const { return samples_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_positive() const { return num_positive_; }
  std::size_t num_negative() const { return samples_.size() - num_positive_; }
  double positive_ratio() const {
    return static_cast<double>(num_positive_) / static_cast<double>(samples_.size());
  }

  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const Sample> samples() const { return samples_; }

  // Subset in the order given by `indices`.
  Dataset select(std::span<const std::size_t> indices) const;

 private:
  std::vector<Sample> samples_;
  std::size_t dim_;
  std::size_t num_positive_ = 0;
};

struct ShardAssignment {
  std::vector<std::vector<std::size_t>> worker_shards;
  std::uint64_t seed = 0;

  std::size_t num_workers() const { return worker_shards.size(); }
  std::size_t min_shard_size() const;
};

// LIBSVM sparse text: "<label> <idx>:<val> ...", 1-based indices. Labels
// {-1,+1} or {0,1}; 0 maps to -1.
Dataset load_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> dim_hint = std::nullopt);

// Dense CSV with a header row; last column is the label.
Dataset load_csv(const std::filesystem::path& path);

// Dispatches on extension: ".csv" -> load_csv, anything else -> load_libsvm.
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> dim_hint = std::nullopt);

// Two isotropic Gaussians at +-separation/sqrt(d) * 1 with round(n*p) positives.
Dataset synth_gaussians(std::size_t n, std::size_t d, double p, double separation,
                        std::uint64_t seed);

// Keeps every positive and a uniform subset of negatives so that the ratio is
// within one sample of target_p. Original row order is preserved.
Dataset rebalance(const Dataset& ds, double target_p, std::uint64_t seed);

// Random permutation split into k contiguous blocks whose sizes differ by <= 1.
ShardAssignment shard(const Dataset& ds, std::size_t k, std::uint64_t seed);

// Random train/test split; both parts must contain both classes.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

}  // namespace coda
