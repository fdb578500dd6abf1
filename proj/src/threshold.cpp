#include "tbal/threshold.hpp"

#include <algorithm>
#include <cmath>

namespace tbal::threshold {

const char* to_string(SigmaKind kind) noexcept {
  switch (kind) {
    case SigmaKind::StdErr: return "std_err";
    case SigmaKind::Hoeffding: return "hoeffding";
    case SigmaKind::Zero: return "zero";
  }
  return "?";
}

SigmaKind sigma_kind_from_string(const std::string& name) {
  if (name == "std_err") return SigmaKind::StdErr;
  if (name == "hoeffding") return SigmaKind::Hoeffding;
  throw ConfigError("unknown sigma kind '" + name + "' (expected std_err or hoeffding)");
}

void ThresholdConfig::validate() const {
  if (!(epsilon_a > 0.0 && epsilon_a < 1.0)) throw ConfigError("epsilon_a must lie in (0, 1)");
  if (n0 < 1) throw ConfigError("threshold.n0 must be >= 1");
  if (sigma_kind == SigmaKind::Hoeffding && !(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("threshold.delta must lie in (0, 1)");
  }
}

double sigma(double est_error, std::size_t n_t, SigmaKind kind, double delta) {
  if (n_t == 0) return kInfinity;
  const auto n = static_cast<double>(n_t);
  switch (kind) {
    case SigmaKind::StdErr: return std::sqrt(est_error * (1.0 - est_error) / n);
    case SigmaKind::Hoeffding: return std::sqrt(std::log(2.0 / delta) / (2.0 * n));
    case SigmaKind::Zero: return 0.0;
  }
  return kInfinity;
}

const ClassThreshold& ThresholdDecision::for_class(int cls) const {
  if (!per_class) return classes.at(0);
  return classes.at(static_cast<std::size_t>(cls));
}

bool ThresholdDecision::accepts(int cls, double score) const {
  const double t = threshold_for(cls);
  return !std::isinf(t) && score >= t;
}

bool ThresholdDecision::all_infinite() const {
  return std::all_of(classes.begin(), classes.end(), [](const ClassThreshold& c) { return c.infinite; });
}

ClassThreshold estimate_single(std::span<const double> unlabeled_scores, std::span<const ValidationScore> val,
                               const ThresholdConfig& cfg) {
  ClassThreshold out;
  std::vector<double> cands(unlabeled_scores.begin(), unlabeled_scores.end());
  std::sort(cands.begin(), cands.end(), std::greater<>());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  out.candidates = cands.size();

  std::vector<ValidationScore> sorted(val.begin(), val.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ValidationScore& a, const ValidationScore& b) { return a.score > b.score; });

  std::size_t j = 0;
  std::size_t wrong = 0;
  for (const double t : cands) {
    while (j < sorted.size() && sorted[j].score >= t) {
      wrong += sorted[j].correct ? 0 : 1;
      ++j;
    }
    if (j < cfg.n0) continue;
    ++out.supported;
    const double err = static_cast<double>(wrong) / static_cast<double>(j);
    const double s = sigma(err, j, cfg.sigma_kind, cfg.delta);
    if (err + s <= cfg.epsilon_a) {
      // Candidates descend, so the last qualifying one is the minimum.
      out.threshold = t;
      out.infinite = false;
      out.support = j;
      out.est_error = err;
      out.sigma = s;
    }
  }
  return out;
}

ThresholdDecision estimate_threshold(std::span<const UnlabeledScore> unlabeled, std::span<const ValidationScore> val,
                                     int num_classes, const ThresholdConfig& cfg) {
  cfg.validate();
  ThresholdDecision out;
  out.per_class = cfg.per_class;
  const std::size_t groups = cfg.per_class ? static_cast<std::size_t>(num_classes) : 1;
  out.classes.assign(groups, ClassThreshold{});
  if (val.empty()) {
    out.empty_validation = true;
    return out;
  }
  if (!cfg.per_class) {
    std::vector<double> scores;
    scores.reserve(unlabeled.size());
    for (const auto& u : unlabeled) scores.push_back(u.score);
    out.classes[0] = estimate_single(scores, val, cfg);
    return out;
  }
  std::vector<std::vector<double>> scores(groups);
  std::vector<std::vector<ValidationScore>> vals(groups);
  for (const auto& u : unlabeled) scores.at(static_cast<std::size_t>(u.predicted)).push_back(u.score);
  for (const auto& v : val) vals.at(static_cast<std::size_t>(v.predicted)).push_back(v);
  for (std::size_t c = 0; c < groups; ++c) out.classes[c] = estimate_single(scores[c], vals[c], cfg);
  return out;
}

bool satisfies_constraint(double t, std::span<const ValidationScore> val, const ThresholdConfig& cfg) {
  std::size_t support = 0;
  std::size_t wrong = 0;
  for (const auto& v : val) {
    if (v.score >= t) {
      ++support;
      wrong += v.correct ? 0 : 1;
    }
  }
  if (support < cfg.n0) return false;
  const double err = static_cast<double>(wrong) / static_cast<double>(support);
  return err + sigma(err, support, cfg.sigma_kind, cfg.delta) <= cfg.epsilon_a;
}

}  // namespace tbal::threshold
