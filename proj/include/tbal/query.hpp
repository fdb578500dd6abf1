#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tbal/confidence.hpp"
#include "tbal/core.hpp"

namespace tbal::query {

enum class Strategy { Random, MarginRandom };
// What "margin" ranks by: the run's confidence score, or the top-1 minus
// top-2 logit gap.
enum class MarginScore { Confidence, Gap };

const char* to_string(Strategy s) noexcept;
Strategy strategy_from_string(const std::string& name);
MarginScore margin_score_from_string(const std::string& name);

struct QueryConfig {
  Strategy strategy = Strategy::MarginRandom;
  double c = 2.0;
  MarginScore margin = MarginScore::Confidence;

  void validate() const;
};

struct QueryResult {
  std::vector<std::size_t> ids;
  bool truncated = false;  // fewer than requested were available
};

// n distinct ids drawn uniformly without replacement.
QueryResult query_random(std::span<const std::size_t> unlabeled, std::size_t n, Rng& rng);

struct Candidate {
  std::size_t id = 0;
  double score = 0.0;
};

// Sorts by (score, id) ascending, keeps the min(floor(c * n), |candidates|)
// least confident and samples n of them uniformly without replacement.
QueryResult query_margin_random(std::span<const Candidate> unlabeled, std::size_t n, double c, Rng& rng);

// Scores the pool's unlabeled points with the model and applies
// query_margin_random.
QueryResult query_margin_random(const model::LinearModel& model, const confidence::Config& conf, const Pool& pool,
                                const QueryConfig& cfg, std::size_t n, Rng& rng);

}  // namespace tbal::query
