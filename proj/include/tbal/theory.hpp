#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tbal/engine.hpp"

namespace tbal::theory {

struct RoundInput {
  std::size_t n_v = 0;     // validation points in the round
  std::size_t n_a = 0;     // points auto-labeled in the round
  double val_error = 0.0;  // empirical error of the labeling region on validation
};

struct BoundInputs {
  double d = 1.0;  // VC dimension
  std::size_t k = 1;
  double delta = 0.05;
  double p0 = 0.5;
  std::vector<RoundInput> rounds;
  std::size_t n_auto = 0;  // N_a
  std::size_t n = 0;       // pool size N
  double t_hat_min = 0.0;

  void validate() const;
};

// sqrt((2d/n) log(e n / d)), the VC bound on the Rademacher complexity.
double rademacher_vc(double n, double d);

// Auto-labeling error bound for homogeneous linear separators:
//   sum_i (n_a_i / N_a) [e_i + (4/p0) sqrt((2/n_v_i)(2d log(e n_v_i / d) + log(8k/delta)))]
//   + (4/p0) sqrt((2k/N_a)(2d log(e N_a / d) + log(8k/delta)))
// Rounds with n_a = 0 carry zero weight and are skipped.
double error_bound_vc(const BoundInputs& in);

// Same bound for an arbitrary class, given its Rademacher complexity as a
// function of the sample size.
double error_bound_general(const BoundInputs& in, const std::function<double(double)>& rademacher);

// 1 - t_min sqrt(4d/pi) - 2k sqrt((2/N)(2d log(eN/d) + log(8k/delta))); may be negative.
double coverage_bound_linear(double t_hat_min, double d, std::size_t k, double n, double delta);

// (g1 sqrt(d) / (2 sqrt(pi))) exp(-(d - 2) g2^2 / 2), for the uniform
// distribution on the unit ball.
double band_probability_bound(double gamma1, double gamma2, double d);

// ceil(12 sigma^2 log(4 c2) / eps^2): the smallest validation size not
// covered by the lower-bound condition n_v < 12 sigma^2 log(4 c2) / eps^2.
std::size_t min_validation_size(double sigma, double epsilon, double c2 = 0.6795704571147613);

// Bound inputs observed in a run. p0 is the smallest fraction of active
// validation points inside the labeling region over the rounds that
// auto-labeled anything.
BoundInputs bound_inputs_from_run(const engine::RunResult& run, double d, double delta);

struct BoundCheck {
  double observed = 0.0;  // run's auto-labeling error (0 when nothing labeled)
  double bound = 0.0;     // +inf when inputs fall outside the formula's domain
  bool vacuous = false;   // bound >= 1
  bool violated = false;  // non-vacuous and observed > bound
};

BoundCheck check_error_bound(const engine::RunResult& run, const BoundInputs& in);

struct McConfig {
  std::size_t dim = 5;
  std::size_t pool_size = 8000;
  std::size_t val_size = 2000;
  std::size_t trials = 100;
  std::uint64_t seed_base = 0;
  double delta = 0.05;
  engine::RunConfig run;
};

struct McReport {
  std::size_t trials = 0;
  std::size_t non_vacuous = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double allowed_rate = 0.0;  // delta + 3 sqrt(delta / trials)
  bool passed = false;
  std::vector<BoundCheck> checks;
};

// Seeded TBAL runs on the unit ball, each checked against error_bound_vc.
McReport verify_error_bound_mc(const McConfig& cfg);

}  // namespace tbal::theory
