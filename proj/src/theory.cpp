#include "tbal/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tbal/data.hpp"
#include "tbal/metrics.hpp"

namespace tbal::theory {

namespace {
constexpr double kE = std::numbers::e;

double log_term(std::size_t k, double delta) { return std::log(8.0 * static_cast<double>(k) / delta); }

// (4/p0) sqrt((2 m / n)(2d log(e n / d) + log(8k/delta)))
double vc_deviation(double n, double d, double m, double p0, double log8k) {
  if (n < d) throw DomainError("sample size " + std::to_string(n) + " below VC dimension " + std::to_string(d));
  return (4.0 / p0) * std::sqrt((2.0 * m / n) * (2.0 * d * std::log(kE * n / d) + log8k));
}
}  // namespace

void BoundInputs::validate() const {
  if (!(d >= 1.0)) throw DomainError("d must be >= 1");
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");
  if (n_auto < 1) throw DomainError("N_a must be >= 1");
  std::size_t sum = 0;
  for (const auto& r : rounds) sum += r.n_a;
  if (sum != n_auto) throw DomainError("per-round n_a do not sum to N_a");
}

double rademacher_vc(double n, double d) {
  if (!(d >= 1.0)) throw DomainError("d must be >= 1");
  if (n < d) throw DomainError("n must be >= d");
  return std::sqrt((2.0 * d / n) * std::log(kE * n / d));
}

double error_bound_vc(const BoundInputs& in) {
  in.validate();
  const double log8k = log_term(in.k, in.delta);
  const auto na = static_cast<double>(in.n_auto);
  double total = 0.0;
  for (const auto& r : in.rounds) {
    if (r.n_a == 0) continue;
    const double w = static_cast<double>(r.n_a) / na;
    total += w * (r.val_error + vc_deviation(static_cast<double>(r.n_v), in.d, 1.0, in.p0, log8k));
  }
  total += vc_deviation(na, in.d, static_cast<double>(in.k), in.p0, log8k);
  return total;
}

double error_bound_general(const BoundInputs& in, const std::function<double(double)>& rademacher) {
  in.validate();
  const double log8k = log_term(in.k, in.delta);
  const auto na = static_cast<double>(in.n_auto);
  const double c = 4.0 / in.p0;
  double per_round = 0.0;
  double weighted_r = 0.0;
  for (const auto& r : in.rounds) {
    if (r.n_a == 0) continue;
    if (r.n_v == 0) throw DomainError("round with auto-labels has no validation points");
    const double w = static_cast<double>(r.n_a) / na;
    const auto nv = static_cast<double>(r.n_v);
    per_round += w * (r.val_error + c * (rademacher(nv) + (2.0 / in.p0) * std::sqrt(log8k / nv)));
    weighted_r += w * rademacher(static_cast<double>(r.n_a));
  }
  return per_round + c * (weighted_r + std::sqrt(static_cast<double>(in.k) / na * log8k));
}

double coverage_bound_linear(double t_hat_min, double d, std::size_t k, double n, double delta) {
  if (!(t_hat_min >= 0.0 && t_hat_min <= 1.0)) throw DomainError("t_hat_min must lie in [0, 1]");
  if (!(d >= 1.0) || k < 1 || n < d) throw DomainError("coverage bound requires d >= 1, k >= 1, N >= d");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  const double spread = std::sqrt((2.0 / n) * (2.0 * d * std::log(kE * n / d) + log_term(k, delta)));
  return 1.0 - t_hat_min * std::sqrt(4.0 * d / std::numbers::pi) - 2.0 * static_cast<double>(k) * spread;
}

double band_probability_bound(double gamma1, double gamma2, double d) {
  if (d < 2.0) throw DomainError("band probability bound requires d >= 2");
  if (!(gamma1 >= 0.0 && gamma1 <= 1.0 && gamma2 >= 0.0 && gamma2 <= 1.0)) {
    throw DomainError("gamma1, gamma2 must lie in [0, 1]");
  }
  return gamma1 * std::sqrt(d) / (2.0 * std::sqrt(std::numbers::pi)) * std::exp(-(d - 2.0) * gamma2 * gamma2 / 2.0);
}

std::size_t min_validation_size(double sigma, double epsilon, double c2) {
  if (!(sigma > 0.0) || !(epsilon > 0.0) || !(c2 > 0.0)) throw DomainError("sigma, epsilon, c2 must be positive");
  const double lg = std::log(4.0 * c2);
  if (!(lg > 0.0)) throw DomainError("log(4 c2) must be positive");
  const double v = 12.0 * sigma * sigma * lg / (epsilon * epsilon);
  // Values within rounding of an integer are that integer.
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(v));
}

BoundInputs bound_inputs_from_run(const engine::RunResult& run, double d, double delta) {
  BoundInputs in;
  in.d = d;
  in.k = std::max<std::size_t>(1, run.k());
  in.delta = delta;
  in.n = run.pool.size();
  in.n_auto = run.n_auto;
  double p0 = 1.0;
  double t_min = std::numeric_limits<double>::infinity();
  for (const auto& r : run.rounds) {
    in.rounds.push_back({r.n_v, r.n_a, r.val_error()});
    if (r.n_a > 0) p0 = std::min(p0, r.val_accept_fraction());
    for (const auto& c : r.decision.classes) {
      if (!c.infinite && c.threshold >= 0.0) t_min = std::min(t_min, c.threshold);
    }
  }
  in.p0 = p0;
  in.t_hat_min = std::isinf(t_min) ? 1.0 : t_min;
  return in;
}

BoundCheck check_error_bound(const engine::RunResult& run, const BoundInputs& in) {
  BoundCheck c;
  const auto rep = metrics::evaluate(run);
  c.observed = rep.err_hat.value_or(0.0);
  if (in.n_auto == 0) {
    c.bound = std::numeric_limits<double>::infinity();
  } else {
    BoundInputs adj = in;
    // An empirical p0 of exactly 1 sits on the open interval's edge.
    adj.p0 = std::min(adj.p0, std::nextafter(1.0, 0.0));
    try {
      c.bound = error_bound_vc(adj);
    } catch (const DomainError&) {
      c.bound = std::numeric_limits<double>::infinity();
    }
  }
  c.vacuous = !(c.bound < 1.0);
  c.violated = !c.vacuous && c.observed > c.bound;
  return c;
}

McReport verify_error_bound_mc(const McConfig& cfg) {
  McReport rep;
  rep.trials = cfg.trials;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const RngSeed seed{cfg.seed_base + t};
    const auto data = data::gen_unit_ball(cfg.dim, cfg.pool_size + cfg.val_size, seed);
    auto [pool, val] = data::split_pool_val(data, cfg.pool_size, cfg.val_size, seed);
    engine::RunConfig rc = cfg.run;
    rc.method = engine::Method::TBAL;
    const auto run = engine::run(std::move(pool), std::move(val), rc, seed);
    const auto in = bound_inputs_from_run(run, static_cast<double>(cfg.dim), cfg.delta);
    const auto check = check_error_bound(run, in);
    rep.non_vacuous += check.vacuous ? 0 : 1;
    rep.violations += check.violated ? 1 : 0;
    rep.checks.push_back(check);
  }
  rep.violation_rate = cfg.trials == 0 ? 0.0 : static_cast<double>(rep.violations) / static_cast<double>(cfg.trials);
  rep.allowed_rate = cfg.delta + 3.0 * std::sqrt(cfg.delta / static_cast<double>(std::max<std::size_t>(1, cfg.trials)));
  rep.passed = rep.violation_rate <= rep.allowed_rate;
  return rep;
}

}  // namespace tbal::theory
