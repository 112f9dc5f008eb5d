#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coda {

class Dataset;

enum class ScorerKind { linear_sigmoid, mlp_sigmoid };

std::string_view to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view name);

// Prediction model h(w; x) in (0,1). Parameters are one flat vector:
//   linear_sigmoid: [w_1..w_d, bias]
//   mlp_sigmoid:    [W_1 (hidden x d, row-major), b_1 (hidden), w_2 (hidden), b_2]
struct ScorerSpec {
  ScorerKind kind = ScorerKind::linear_sigmoid;
  std::size_t dim = 1;
  std::size_t hidden = 0;

  static ScorerSpec linear(std::size_t dim) { return {ScorerKind::linear_sigmoid, dim, 0}; }
  static ScorerSpec mlp(std::size_t dim, std::size_t hidden) { return {ScorerKind::mlp_sigmoid, dim, hidden}; }

  std::size_t param_count() const;
  void validate() const;
};

double score(const ScorerSpec& spec, std::span<const double> params, std::span<const double> x);

// Writes dh/dparams into `grad` (length param_count) and returns h.
double score_grad(const ScorerSpec& spec, std::span<const double> params, std::span<const double> x,
                  std::span<double> grad);

// Bound on ||grad_w h|| over the dataset. Uniform in the parameters for
// linear_sigmoid; for mlp_sigmoid it depends on the output-layer weights in
// `params` and only holds near them.
struct GradientBound {
  double value = 0.0;
  bool uniform = true;
};

GradientBound lipschitz_bound(const ScorerSpec& spec, const Dataset& ds,
                              std::span<const double> params = {});

// Bound on the spectral norm of the Hessian of h (the L_h of the analysis),
// with the same uniformity caveat as lipschitz_bound.
GradientBound smoothness_bound(const ScorerSpec& spec, const Dataset& ds,
                               std::span<const double> params = {});

// Zero for linear_sigmoid; small deterministic random weights for mlp_sigmoid,
// whose hidden layer has a zero gradient at the origin.
std::vector<double> initial_params(const ScorerSpec& spec, std::uint64_t seed);

}  // namespace coda
