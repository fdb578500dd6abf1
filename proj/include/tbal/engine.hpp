#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tbal/confidence.hpp"
#include "tbal/core.hpp"
#include "tbal/model.hpp"
#include "tbal/query.hpp"
#include "tbal/threshold.hpp"

namespace tbal::engine {

// TBAL is the iterative train / threshold / auto-label / query loop. PL and
// AL train a single final model on passively or actively queried data and
// label everything left; the SC variants instead apply one threshold pass.
enum class Method { TBAL, PL, AL, PLSC, ALSC };

const char* to_string(Method m) noexcept;
Method method_from_string(const std::string& name);

struct RunConfig {
  Method method = Method::TBAL;
  std::size_t seed_size = 100;  // n_s
  std::size_t batch_size = 25;  // n_b
  std::size_t budget = 500;     // N_q, maximum human-labeled training points
  threshold::ThresholdConfig threshold;
  query::QueryConfig query;
  model::TrainConfig train;
  confidence::Config confidence;
  // Re-verify the per-round invariants and throw IntegrityError on violation.
  bool check_invariants = true;
  // Testing hook: every threshold becomes +inf.
  bool force_abstain = false;

  double epsilon_a() const noexcept { return threshold.epsilon_a; }
  void validate() const;
};

struct RoundRecord {
  int round = 0;
  std::size_t train_size = 0;
  double train_loss = 0.0;
  double train_error = 0.0;
  bool single_class = false;
  threshold::ThresholdDecision decision;
  double score_shift = 0.0;
  std::vector<std::pair<std::size_t, int>> auto_labeled;  // (id, label)
  std::vector<std::size_t> val_deactivated;
  // Batch queried at the end of this round; trains the next round's model.
  std::vector<std::size_t> queried;
  std::size_t n_unlabeled_before = 0;
  std::size_t n_a = 0;         // auto-labeled this round
  std::size_t n_v = 0;         // active validation points when thresholding
  std::size_t m_a = 0;         // auto-labeling mistakes this round (ground truth)
  std::size_t val_accepted = 0;
  std::size_t val_accepted_wrong = 0;

  // Empirical error of the round's auto-labeling region on validation data.
  double val_error() const noexcept {
    return val_accepted == 0 ? 0.0 : static_cast<double>(val_accepted_wrong) / static_cast<double>(val_accepted);
  }
  // Fraction of active validation points inside the auto-labeling region.
  double val_accept_fraction() const noexcept {
    return n_v == 0 ? 0.0 : static_cast<double>(val_accepted) / static_cast<double>(n_v);
  }
};

struct RunResult {
  RunResult(Pool p, ValidationSet v) : pool(std::move(p)), validation(std::move(v)) {}

  Method method = Method::TBAL;
  Pool pool;
  ValidationSet validation;
  std::vector<std::size_t> seed_ids;
  std::vector<RoundRecord> rounds;
  std::size_t human_labels = 0;  // pool points labeled by the oracle
  std::size_t val_size = 0;      // validation labels supplied up front
  std::size_t n_auto = 0;        // N_a, sum of per-round n_a
  model::LinearModel final_model;

  std::size_t k() const noexcept { return rounds.size(); }
  // Seed batch followed by every round's queried batch.
  std::vector<std::size_t> query_sequence() const;
};

// Runs cfg.method on private copies of pool and validation.
RunResult run(Pool pool, ValidationSet validation, const RunConfig& cfg, RngSeed seed);

RunResult run_tbal(Pool pool, ValidationSet validation, const RunConfig& cfg, RngSeed seed);
RunResult run_baseline(Pool pool, ValidationSet validation, const RunConfig& cfg, RngSeed seed);

}  // namespace tbal::engine
