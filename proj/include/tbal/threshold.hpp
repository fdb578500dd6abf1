#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tbal/error.hpp"

namespace tbal::threshold {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Zero disables the confidence inflation; it is meant for isolating the
// candidate scan in tests and is not accepted from config files.
enum class SigmaKind { StdErr, Hoeffding, Zero };

const char* to_string(SigmaKind kind) noexcept;
SigmaKind sigma_kind_from_string(const std::string& name);

struct ThresholdConfig {
  double epsilon_a = 0.01;
  std::size_t n0 = 25;
  SigmaKind sigma_kind = SigmaKind::StdErr;
  double delta = 0.05;  // Hoeffding only
  bool per_class = true;

  void validate() const;
};

// StdErr: sqrt(e (1 - e) / n_t); Hoeffding: sqrt(log(2 / delta) / (2 n_t)).
// n_t = 0 yields +inf.
double sigma(double est_error, std::size_t n_t, SigmaKind kind, double delta = 0.05);

struct ValidationScore {
  int predicted = 0;
  double score = 0.0;
  bool correct = true;
};

struct UnlabeledScore {
  int predicted = 0;
  double score = 0.0;
};

struct ClassThreshold {
  double threshold = kInfinity;
  bool infinite = true;
  std::size_t support = 0;     // validation points with score >= threshold
  double est_error = 0.0;      // their empirical error
  double sigma = 0.0;
  std::size_t candidates = 0;  // distinct unlabeled scores examined
  std::size_t supported = 0;   // candidates passing the n0 filter
};

struct ThresholdDecision {
  // One entry per class when per_class, otherwise a single shared entry.
  std::vector<ClassThreshold> classes;
  bool per_class = false;
  bool empty_validation = false;

  const ClassThreshold& for_class(int cls) const;
  double threshold_for(int cls) const { return for_class(cls).threshold; }
  bool accepts(int cls, double score) const;
  bool all_infinite() const;
};

// Minimum candidate threshold t among the distinct unlabeled scores whose
// validation support |{v : score_v >= t}| is at least n0 and whose
// empirical error plus sigma is at most epsilon_a; +inf when none qualifies.
ClassThreshold estimate_single(std::span<const double> unlabeled_scores, std::span<const ValidationScore> val,
                               const ThresholdConfig& cfg);

// Full estimate; with per_class the search runs separately on the points
// (unlabeled and validation) predicted as each class.
ThresholdDecision estimate_threshold(std::span<const UnlabeledScore> unlabeled, std::span<const ValidationScore> val,
                                     int num_classes, const ThresholdConfig& cfg);

// Whether a chosen finite threshold satisfies the selection constraint when
// recomputed from scratch over val.
bool satisfies_constraint(double t, std::span<const ValidationScore> val, const ThresholdConfig& cfg);

}  // namespace tbal::threshold
