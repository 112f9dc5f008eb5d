#include "coda/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coda/error.hpp"

namespace coda {
namespace {

void check_point(const ScorerSpec& spec, const PrimalPoint& v, double p) {
  if (v.param_count() != spec.param_count()) {
    throw Error("primal point has " + std::to_string(v.param_count()) + " model parameters, scorer expects " +
                std::to_string(spec.param_count()));
  }
  if (!(p > 0.0 && p < 1.0)) throw Error("positive ratio p must lie in (0,1)");
}

struct ClassMeans {
  double neg_sum = 0.0, pos_sum = 0.0;
  std::size_t neg = 0, pos = 0;

  void add(double h, int label) {
    if (label == 1) {
      pos_sum += h;
      ++pos;
    } else {
      neg_sum += h;
      ++neg;
    }
  }
};

}  // namespace

PrimalPoint::PrimalPoint(std::vector<double> w, double a, double b) : v_(std::move(w)) {
  v_.push_back(a);
  v_.push_back(b);
}

PrimalPoint PrimalPoint::from_flat(std::vector<double> flat) {
  if (flat.size() < 2) throw Error("primal point needs at least the (a, b) slots");
  PrimalPoint out;
  out.v_ = std::move(flat);
  return out;
}

bool PrimalPoint::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

ProblemConstants ProblemConstants::make(double p, double G_h, double L_v, double mu) {
  if (!(p > 0.0 && p < 1.0)) throw Error("positive ratio p must lie in (0,1)");
  if (!(L_v > 0.0)) throw Error("L_v must be > 0");
  if (!(mu > 0.0 && mu <= 1.0)) throw Error("mu must lie in (0,1]");
  if (!(G_h >= 0.0)) throw Error("G_h must be >= 0");

  ProblemConstants c;
  c.p = p;
  c.G_h = G_h;
  c.L_v = L_v;
  c.mu = mu;
  const double q = 1.0 - p;
  c.p_tilde = std::max(p, q);
  c.alpha_bound = c.p_tilde / (p * q);
  c.mu_alpha = 2.0 * p * q;
  c.L_alpha = 2.0 * p * q;
  c.G_alpha = 2.0 * c.p_tilde;
  c.G_v = 2.0 * c.p_tilde * G_h;
  const double wcoef = 6.0 + 2.0 * c.alpha_bound;
  c.B_v = std::sqrt(wcoef * wcoef * G_h * G_h + 16.0 * q * q + 16.0 * p * p);
  c.B_alpha = 2.0 + 4.0 * c.p_tilde;
  c.sigma_v = 2.0 * c.B_v;
  c.sigma_alpha = 2.0 * c.B_alpha;
  c.B = std::max(c.B_v, c.B_alpha);
  c.gamma = 1.0 / (2.0 * L_v);
  c.H = 6.0 * c.G_v * c.G_v / c.mu_alpha + 6.0 * L_v + 6.0 * c.G_alpha * c.G_alpha / L_v +
        6.0 * c.L_alpha * c.L_alpha / c.mu_alpha;
  const double log_inv = std::log(1.0 / c.p_tilde);
  c.C = 3.0 * std::pow(c.p_tilde, 1.0 / log_inv) / (2.0 * log_inv);
  return c;
}

double ProblemConstants::step_cap() const {
  const double q = 1.0 - p;
  return std::min({1.0 / (2.0 * p * q), 1.0 / (2.0 * p), 1.0 / (2.0 * q)});
}

double ProblemConstants::full_step_bound() const {
  return std::min({1.0 / (L_v + 3.0 * G_alpha * G_alpha / mu_alpha), 1.0 / (L_alpha + 3.0 * G_v * G_v / L_v),
                   3.0 / (2.0 * mu_alpha), step_cap()});
}

double analytic_grad_lipschitz(double p, double G_h, double L_h) {
  const double q = 1.0 - p;
  const double ratio = std::max(p, q) / (p * q);
  return std::sqrt(G_h * G_h + L_h + 4.0 + 2.0 * ratio * 8.0 * q * q * (G_h * G_h + 1.0));
}

double eval_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z, double p) {
  check_point(spec, v, p);
  const double h = score(spec, v.w(), z.features);
  const double q = 1.0 - p;
  double out = -p * q * alpha * alpha;
  if (z.label == 1) {
    out += q * (h - v.a()) * (h - v.a()) - 2.0 * (1.0 + alpha) * q * h;
  } else {
    out += p * (h - v.b()) * (h - v.b()) + 2.0 * (1.0 + alpha) * p * h;
  }
  return out;
}

double grad_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z, double p,
              std::span<double> grad_v) {
  check_point(spec, v, p);
  if (grad_v.size() != v.size()) throw Error("grad_F: output buffer has the wrong length");
  const std::size_t n = v.param_count();
  const double h = score_grad(spec, v.w(), z.features, grad_v.first(n));
  const double q = 1.0 - p;
  double coef;
  if (z.label == 1) {
    coef = 2.0 * q * (h - v.a()) - 2.0 * (1.0 + alpha) * q;
    grad_v[n] = -2.0 * q * (h - v.a());
    grad_v[n + 1] = 0.0;
  } else {
    coef = 2.0 * p * (h - v.b()) + 2.0 * (1.0 + alpha) * p;
    grad_v[n] = 0.0;
    grad_v[n + 1] = -2.0 * p * (h - v.b());
  }
  for (std::size_t i = 0; i < n; ++i) grad_v[i] *= coef;

  const double margin = z.label == 1 ? -q * h : p * h;
  return 2.0 * margin - 2.0 * p * q * alpha;
}

std::vector<double> grad_v_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z,
                             double p) {
  std::vector<double> g(v.size());
  grad_F(spec, v, alpha, z, p, g);
  return g;
}

double grad_alpha_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z, double p) {
  check_point(spec, v, p);
  const double h = score(spec, v.w(), z.features);
  const double q = 1.0 - p;
  const double margin = z.label == 1 ? -q * h : p * h;
  return 2.0 * margin - 2.0 * p * q * alpha;
}

double dual_argmax(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& ds) {
  ClassMeans m;
  for (const auto& z : ds.samples()) m.add(score(spec, v.w(), z.features), z.label);
  if (m.pos == 0 || m.neg == 0) throw Error("dual_argmax: both classes are required");
  return m.neg_sum / static_cast<double>(m.neg) - m.pos_sum / static_cast<double>(m.pos);
}

double dual_argmax(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& ds, const ShardAssignment& shards) {
  double neg_terms = 0.0, pos_terms = 0.0;
  std::size_t neg_workers = 0, pos_workers = 0;
  for (const auto& local : shards.worker_shards) {
    ClassMeans m;
    for (auto i : local) m.add(score(spec, v.w(), ds[i].features), ds[i].label);
    if (m.neg > 0) {
      neg_terms += m.neg_sum / static_cast<double>(m.neg);
      ++neg_workers;
    }
    if (m.pos > 0) {
      pos_terms += m.pos_sum / static_cast<double>(m.pos);
      ++pos_workers;
    }
  }
  if (neg_workers == 0 || pos_workers == 0) throw Error("dual_argmax: both classes are required");
  return neg_terms / static_cast<double>(neg_workers) - pos_terms / static_cast<double>(pos_workers);
}

double empirical_f(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Dataset& ds) {
  const double p = ds.positive_ratio();
  double sum = 0.0;
  for (const auto& z : ds.samples()) sum += eval_F(spec, v, alpha, z, p);
  return sum / static_cast<double>(ds.size());
}

double eval_phi(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& ds) {
  return empirical_f(spec, v, dual_argmax(spec, v, ds), ds);
}

}  // namespace coda
