#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coda/data.hpp"
#include "coda/scorer.hpp"

namespace coda {

// v = (w, a, b) stored contiguously as [w..., a, b].
class PrimalPoint {
 public:
  PrimalPoint() = default;
  explicit PrimalPoint(std::size_t param_count) : v_(param_count + 2, 0.0) {}
  PrimalPoint(std::vector<double> w, double a, double b);
  static PrimalPoint from_flat(std::vector<double> flat);

  std::size_t param_count() const { return v_.size() - 2; }
  std::size_t size() const { return v_.size(); }

  std::span<double> w() { return std::span<double>(v_).first(param_count()); }
  std::span<const double> w() const { return std::span<const double>(v_).first(param_count()); }
  double& a() { return v_[v_.size() - 2]; }
  double a() const { return v_[v_.size() - 2]; }
  double& b() { return v_.back(); }
  double b() const { return v_.back(); }

  std::span<double> flat() { return v_; }
  std::span<const double> flat() const { return v_; }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  bool all_finite() const;
  friend bool operator==(const PrimalPoint&, const PrimalPoint&) = default;

 private:
  std::vector<double> v_;
};

// Constants of the smoothness/boundedness analysis for a given positive ratio
// p and gradient bound G_h. L_v and mu are inputs.
struct ProblemConstants {
  double p = 0.5;
  double G_h = 0.0;
  double L_v = 1.0;
  double mu = 0.1;

  double p_tilde = 0.5;      // max(p, 1-p)
  double alpha_bound = 0.0;  // max(p,1-p) / (p(1-p))
  double mu_alpha = 0.0;
  double L_alpha = 0.0;
  double G_alpha = 0.0;
  double G_v = 0.0;
  double B_v = 0.0;
  double B_alpha = 0.0;
  double sigma_v = 0.0;
  double sigma_alpha = 0.0;
  double B = 0.0;
  double gamma = 0.0;
  double H = 0.0;
  double C = 0.0;

  static ProblemConstants make(double p, double G_h, double L_v, double mu);

  // min{1/(2p(1-p)), 1/(2p), 1/(2(1-p))}: keeps |alpha|, |a|, |b| bounded.
  double step_cap() const;
  // Full step condition of the one-stage analysis, including the L_v and G terms.
  double full_step_bound() const;
};

// Lipschitz constant of grad_v F from G_h and L_h (the L_2 of the analysis).
double analytic_grad_lipschitz(double p, double G_h, double L_h);

double eval_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z, double p);

// Fills `grad_v` (length v.size()) with grad_v F and returns grad_alpha F.
double grad_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z, double p,
              std::span<double> grad_v);

std::vector<double> grad_v_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z,
                             double p);
double grad_alpha_F(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Sample& z, double p);

// Mean score on negatives minus mean score on positives: the exact maximizer of
// the empirical f(v, .) when p is the dataset's own positive ratio.
double dual_argmax(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& ds);

// Per-worker class means averaged across workers. A worker lacking a class is
// left out of that class's average.
double dual_argmax(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& ds,
                   const ShardAssignment& shards);

// (1/n) sum_i F(v, alpha; z_i) with p = ds.positive_ratio().
double empirical_f(const ScorerSpec& spec, const PrimalPoint& v, double alpha, const Dataset& ds);

// phi(v) = max_alpha empirical f(v, alpha).
double eval_phi(const ScorerSpec& spec, const PrimalPoint& v, const Dataset& ds);

}  // namespace coda
