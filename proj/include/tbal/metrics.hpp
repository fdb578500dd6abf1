#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tbal/engine.hpp"

namespace tbal::metrics {

struct RoundMetrics {
  std::size_t n_a = 0;
  std::size_t m_a = 0;
  double val_error = 0.0;
};

struct MetricReport {
  std::size_t n = 0;         // pool size N
  std::size_t n_auto = 0;    // N_a
  std::size_t mistakes = 0;  // auto-labels disagreeing with ground truth
  // Auto-labeling error; empty when nothing was auto-labeled.
  std::optional<double> err_hat;
  double cov_hat = 0.0;      // N_a / N
  std::vector<RoundMetrics> per_round;
  std::size_t human_labels = 0;
  std::size_t val_labels = 0;
  std::size_t rounds = 0;

  bool err_defined() const noexcept { return err_hat.has_value(); }
};

// Counts auto-labeling mistakes against the pool's ground truth. Throws
// IntegrityError when result was not produced from this pool or its
// per-round records disagree with the final states.
MetricReport evaluate(const engine::RunResult& result, const Pool& pool);
// Evaluates against the result's own pool copy.
MetricReport evaluate(const engine::RunResult& result);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct TrialSummary {
  Summary err_hat;  // over reports with a defined error
  Summary cov_hat;
  Summary human_labels;
  Summary val_labels;
  Summary rounds;
};

TrialSummary summarize_trials(std::span<const MetricReport> reports);

}  // namespace tbal::metrics
