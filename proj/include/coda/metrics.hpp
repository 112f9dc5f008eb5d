#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "coda/data.hpp"
#include "coda/objective.hpp"
#include "coda/scorer.hpp"

namespace coda {

// Rank-based AUC with midranks: ties between a positive and a negative count
// one half. Labels are +-1; both classes are required.
double auc(std::span<const double> scores, std::span<const int> labels);

struct RunMetrics {
  std::string kind = "eval";  // "eval" (mid-stage) or "stage" (end of stage)
  std::size_t stage = 0;
  std::uint64_t cumulative_iterations = 0;
  std::uint64_t cumulative_rounds = 0;
  std::uint64_t scalars_moved = 0;
  std::uint64_t scalars_up = 0;
  std::uint64_t scalars_down = 0;
  double test_auc = 0.5;
  std::optional<double> empirical_phi;
  std::optional<double> wall_seconds;
};

struct Evaluation {
  double test_auc = 0.5;
  std::optional<double> empirical_phi;
};

// Scores every test sample with the model part of `v`; when `objective_data`
// is given, also reports phi(v) over it (normally the training set).
Evaluation evaluate(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& test,
                    const Dataset* objective_data = nullptr);

}  // namespace coda
