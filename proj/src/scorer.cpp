#include "coda/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coda/data.hpp"
#include "coda/error.hpp"
#include "coda/rng.hpp"

namespace coda {
namespace {

// max |sigma''| = 1/(6 sqrt 3), max |tanh''| = 4/(3 sqrt 3)
constexpr double kSigmoidCurvature = 0.09622504486493763;
constexpr double kTanhCurvature = 0.769800358919501;

// Returns sigma(u) clamped into the open interval (0,1) and writes sigma'(u).
double sigmoid(double u, double& slope) {
  const double e = std::exp(-std::abs(u));
  const double s = u >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  slope = e / ((1.0 + e) * (1.0 + e));
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(s, lo, hi);
}

void check_dims(const ScorerSpec& spec, std::span<const double> params, std::span<const double> x) {
  if (params.size() != spec.param_count()) {
    throw Error("scorer: expected " + std::to_string(spec.param_count()) + " parameters, got " +
                std::to_string(params.size()));
  }
  if (x.size() != spec.dim) {
    throw Error("scorer: expected input of dimension " + std::to_string(spec.dim) + ", got " +
                std::to_string(x.size()));
  }
}

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double max_augmented_sq_norm(const Dataset& ds) {
  double m = 0.0;
  for (const auto& s : ds.samples()) m = std::max(m, sq_norm(s.features) + 1.0);
  return m;
}

double linear_raw(std::span<const double> params, std::span<const double> x) {
  double u = params[x.size()];
  for (std::size_t k = 0; k < x.size(); ++k) u += params[k] * x[k];
  return u;
}

}  // namespace

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::linear_sigmoid:
      return "linear_sigmoid";
    case ScorerKind::mlp_sigmoid:
      return "mlp_sigmoid";
  }
  return "unknown";
}

ScorerKind parse_scorer_kind(std::string_view name) {
  if (name == "linear_sigmoid") return ScorerKind::linear_sigmoid;
  if (name == "mlp_sigmoid") return ScorerKind::mlp_sigmoid;
  throw Error("unknown scorer kind '" + std::string(name) + "'");
}

std::size_t ScorerSpec::param_count() const {
  switch (kind) {
    case ScorerKind::linear_sigmoid:
      return dim + 1;
    case ScorerKind::mlp_sigmoid:
      return (dim + 1) * hidden + hidden + 1;
  }
  return 0;
}

void ScorerSpec::validate() const {
  if (dim == 0) throw Error("scorer: dim must be >= 1");
  if (kind == ScorerKind::mlp_sigmoid && hidden == 0) throw Error("scorer: mlp_sigmoid needs hidden >= 1");
}

double score(const ScorerSpec& spec, std::span<const double> params, std::span<const double> x) {
  check_dims(spec, params, x);
  double slope;
  if (spec.kind == ScorerKind::linear_sigmoid) return sigmoid(linear_raw(params, x), slope);

  const std::size_t d = spec.dim, H = spec.hidden;
  const double* W1 = params.data();
  const double* b1 = W1 + H * d;
  const double* w2 = b1 + H;
  double u = w2[H];
  for (std::size_t j = 0; j < H; ++j) {
    double z = b1[j];
    for (std::size_t k = 0; k < d; ++k) z += W1[j * d + k] * x[k];
    u += w2[j] * std::tanh(z);
  }
  return sigmoid(u, slope);
}

double score_grad(const ScorerSpec& spec, std::span<const double> params, std::span<const double> x,
                  std::span<double> grad) {
  check_dims(spec, params, x);
  if (grad.size() != params.size()) throw Error("scorer: gradient buffer has the wrong length");
  double slope;
  if (spec.kind == ScorerKind::linear_sigmoid) {
    const double h = sigmoid(linear_raw(params, x), slope);
    for (std::size_t k = 0; k < x.size(); ++k) grad[k] = slope * x[k];
    grad[x.size()] = slope;
    return h;
  }

  const std::size_t d = spec.dim, H = spec.hidden;
  const double* W1 = params.data();
  const double* b1 = W1 + H * d;
  const double* w2 = b1 + H;
  std::vector<double> act(H);
  double u = w2[H];
  for (std::size_t j = 0; j < H; ++j) {
    double z = b1[j];
    for (std::size_t k = 0; k < d; ++k) z += W1[j * d + k] * x[k];
    act[j] = std::tanh(z);
    u += w2[j] * act[j];
  }
  const double h = sigmoid(u, slope);

  double* gW1 = grad.data();
  double* gb1 = gW1 + H * d;
  double* gw2 = gb1 + H;
  for (std::size_t j = 0; j < H; ++j) {
    const double back = slope * w2[j] * (1.0 - act[j] * act[j]);
    for (std::size_t k = 0; k < d; ++k) gW1[j * d + k] = back * x[k];
    gb1[j] = back;
    gw2[j] = slope * act[j];
  }
  gw2[H] = slope;
  return h;
}

GradientBound lipschitz_bound(const ScorerSpec& spec, const Dataset& ds, std::span<const double> params) {
  const double xx = max_augmented_sq_norm(ds);
  if (spec.kind == ScorerKind::linear_sigmoid) return {0.25 * std::sqrt(xx), true};

  if (params.size() != spec.param_count()) throw Error("lipschitz_bound: mlp_sigmoid needs current params");
  const std::size_t H = spec.hidden;
  const auto w2 = params.subspan(H * spec.dim + H, H);
  const double bound = 0.25 * std::sqrt(static_cast<double>(H) + 1.0 + sq_norm(w2) * xx);
  return {bound, false};
}

GradientBound smoothness_bound(const ScorerSpec& spec, const Dataset& ds, std::span<const double> params) {
  const double xx = max_augmented_sq_norm(ds);
  if (spec.kind == ScorerKind::linear_sigmoid) return {kSigmoidCurvature * xx, true};

  if (params.size() != spec.param_count()) throw Error("smoothness_bound: mlp_sigmoid needs current params");
  const std::size_t H = spec.hidden;
  const auto w2 = params.subspan(H * spec.dim + H, H);
  double w2_max = 0.0;
  for (double w : w2) w2_max = std::max(w2_max, std::abs(w));
  const double grad_u_sq = static_cast<double>(H) + 1.0 + sq_norm(w2) * xx;
  const double hess_u = std::sqrt(xx) + kTanhCurvature * w2_max * xx;
  return {kSigmoidCurvature * grad_u_sq + 0.25 * hess_u, false};
}

std::vector<double> initial_params(const ScorerSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<double> params(spec.param_count(), 0.0);
  if (spec.kind == ScorerKind::linear_sigmoid) return params;

  Engine eng(derive_seed(seed, 0, 0, StreamKind::init));
  const std::size_t d = spec.dim, H = spec.hidden;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(H));
  for (std::size_t i = 0; i < H * d; ++i) params[i] = s1 * standard_normal(eng);
  for (std::size_t j = 0; j < H; ++j) params[H * d + H + j] = s2 * standard_normal(eng);
  return params;
}

}  // namespace coda
