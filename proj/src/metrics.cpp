#include "coda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "coda/error.hpp"

namespace coda {

double auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw Error("auc: scores and labels differ in length");
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1 && labels[i] != -1) throw Error("auc: labels must be +1 or -1");
    if (std::isnan(scores[i])) throw Error("auc: NaN score");
    if (labels[i] == 1) ++n_pos;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("auc: both classes are required");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the midrank of a tie block [i, j) with 1-based ranks is i + j + 1.
  std::uint64_t pos_rank_x2 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t rank_x2 = i + j + 1;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) pos_rank_x2 += rank_x2;
    }
    i = j;
  }
  const std::uint64_t u_x2 = pos_rank_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Evaluation evaluate(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& test, const Dataset* objective_data) {
  std::vector<double> scores(test.size());
  std::vector<int> labels(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    scores[i] = score(spec, v.w(), test[i].features);
    labels[i] = test[i].label;
  }
  Evaluation out;
  out.test_auc = auc(scores, labels);
  if (objective_data) out.empirical_phi = eval_phi(spec, v, *objective_data);
  return out;
}

}  // namespace coda
