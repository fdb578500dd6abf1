#include "tbal/query.hpp"

#include <algorithm>
#include <cmath>

namespace tbal::query {

const char* to_string(Strategy s) noexcept { return s == Strategy::Random ? "random" : "margin_random"; }

Strategy strategy_from_string(const std::string& name) {
  if (name == "random") return Strategy::Random;
  if (name == "margin_random") return Strategy::MarginRandom;
  throw ConfigError("unknown query strategy '" + name + "' (expected random or margin_random)");
}

MarginScore margin_score_from_string(const std::string& name) {
  if (name == "confidence") return MarginScore::Confidence;
  if (name == "gap") return MarginScore::Gap;
  throw ConfigError("unknown margin score '" + name + "' (expected confidence or gap)");
}

void QueryConfig::validate() const {
  if (strategy == Strategy::MarginRandom && !(c > 1.0)) throw ConfigError("query.C must be > 1");
}

QueryResult query_random(std::span<const std::size_t> unlabeled, std::size_t n, Rng& rng) {
  QueryResult out;
  if (n > unlabeled.size()) {
    out.truncated = true;
    n = unlabeled.size();
  }
  for (const auto pos : rng.sample_indices(unlabeled.size(), n)) out.ids.push_back(unlabeled[pos]);
  return out;
}

QueryResult query_margin_random(std::span<const Candidate> unlabeled, std::size_t n, double c, Rng& rng) {
  std::vector<Candidate> sorted(unlabeled.begin(), unlabeled.end());
  std::sort(sorted.begin(), sorted.end(), [](const Candidate& a, const Candidate& b) {
    return a.score < b.score || (a.score == b.score && a.id < b.id);
  });
  const auto wanted = static_cast<std::size_t>(std::floor(c * static_cast<double>(n)));
  const std::size_t slice = std::min(std::max(wanted, n), sorted.size());
  std::vector<std::size_t> ids(slice);
  for (std::size_t i = 0; i < slice; ++i) ids[i] = sorted[i].id;
  QueryResult out = query_random(ids, n, rng);
  out.truncated = n > unlabeled.size();
  return out;
}

QueryResult query_margin_random(const model::LinearModel& model, const confidence::Config& conf, const Pool& pool,
                                const QueryConfig& cfg, std::size_t n, Rng& rng) {
  std::vector<Candidate> cands;
  for (const auto id : pool.unlabeled_ids()) {
    const auto x = pool.features(id);
    const double s = cfg.margin == MarginScore::Gap ? confidence::logit_gap(model::logits(model, x))
                                                    : confidence::score(conf, model, x).confidence;
    cands.push_back({id, s});
  }
  return query_margin_random(cands, n, cfg.c, rng);
}

}  // namespace tbal::query
