#include "tbal/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tbal::engine {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::TBAL: return "tbal";
    case Method::PL: return "pl";
    case Method::AL: return "al";
    case Method::PLSC: return "pl_sc";
    case Method::ALSC: return "al_sc";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "tbal") return Method::TBAL;
  if (name == "pl") return Method::PL;
  if (name == "al") return Method::AL;
  if (name == "pl_sc") return Method::PLSC;
  if (name == "al_sc") return Method::ALSC;
  throw ConfigError("unknown method '" + name + "' (expected tbal, pl, al, pl_sc or al_sc)");
}

void RunConfig::validate() const {
  if (seed_size > budget) throw ConfigError("seed size n_s exceeds budget N_q");
  if (batch_size < 1) throw ConfigError("batch size n_b must be >= 1");
  threshold.validate();
  query.validate();
  train.validate();
  if (confidence.kind == confidence::Kind::Energy && !(confidence.temperature > 0.0)) {
    throw ConfigError("energy temperature must be > 0");
  }
}

std::vector<std::size_t> RunResult::query_sequence() const {
  std::vector<std::size_t> seq = seed_ids;
  for (const auto& r : rounds) seq.insert(seq.end(), r.queried.begin(), r.queried.end());
  return seq;
}

namespace {

// Scores of one model over the current unlabeled points and active
// validation points.
struct ScoredRound {
  std::vector<std::size_t> pool_ids;
  std::vector<threshold::UnlabeledScore> pool;
  std::vector<std::size_t> val_ids;
  std::vector<threshold::ValidationScore> val;
  double shift = 0.0;
};

class Runner {
 public:
  Runner(Pool pool, ValidationSet val, const RunConfig& cfg, RngSeed seed)
      : cfg_(cfg), root_(seed), result_(std::move(pool), std::move(val)), oracle_(result_.pool) {
    cfg_.validate();
    if (result_.pool.size() == 0) throw ConfigError("pool is empty");
    if (result_.validation.size() > 0 && result_.validation.data().dim() != result_.pool.dim()) {
      throw InputError("validation and pool dimensions differ");
    }
    result_.method = cfg.method;
    result_.val_size = result_.validation.size();
    train_.num_classes = result_.pool.num_classes();
    train_.x = FeatureMatrix(0, result_.pool.dim());
  }

  RunResult run_tbal() {
    seed_query();
    for (int round = 1;; ++round) {
      RoundRecord rec = begin_round(round);
      const auto fitted = train(round, rec);
      ScoredRound scored = score(fitted);
      const auto decision = estimate(scored);
      apply_threshold(decision, scored, round, rec);
      rec.decision = decision;
      rec.score_shift = scored.shift;

      const std::size_t remaining = result_.pool.counts().n_unlabeled;
      const bool budget_spent = train_.size() >= cfg_.budget;
      if (remaining > 0 && !budget_spent) {
        const std::size_t n = std::min({cfg_.batch_size, cfg_.budget - train_.size(), remaining});
        rec.queried = query_batch(fitted, scored, n, round);
      }
      finish_round(std::move(rec));
      if (remaining == 0 || budget_spent) break;
    }
    return finish();
  }

  RunResult run_baseline() {
    seed_query();
    const bool active = cfg_.method == Method::AL || cfg_.method == Method::ALSC;
    int round = 1;
    if (!active) {
      const std::size_t remaining = result_.pool.counts().n_unlabeled;
      const std::size_t n = std::min(cfg_.budget - train_.size(), remaining);
      if (n > 0) {
        Rng rng = root_.derive("passive_query");
        label_batch(query::query_random(result_.pool.unlabeled_ids(), n, rng).ids, 0);
      }
    } else {
      // Same training and query streams as TBAL, so that TBAL with every
      // threshold at +inf reproduces this query sequence.
      for (;; ++round) {
        const std::size_t remaining = result_.pool.counts().n_unlabeled;
        if (train_.size() >= cfg_.budget || remaining == 0) break;
        RoundRecord rec = begin_round(round);
        const auto fitted = train(round, rec);
        ScoredRound scored = score(fitted);
        rec.decision.classes.assign(1, threshold::ClassThreshold{});
        rec.score_shift = scored.shift;
        rec.n_v = scored.val.size();
        const std::size_t n = std::min({cfg_.batch_size, cfg_.budget - train_.size(), remaining});
        rec.queried = query_batch(fitted, scored, n, round);
        finish_round(std::move(rec));
      }
    }

    RoundRecord rec = begin_round(round);
    const auto fitted = train(round, rec);
    ScoredRound scored = score(fitted);
    rec.score_shift = scored.shift;
    if (cfg_.method == Method::PL || cfg_.method == Method::AL) {
      label_all(scored, round, rec);
      // No threshold: every remaining point is labeled.
      threshold::ClassThreshold all;
      all.threshold = -threshold::kInfinity;
      all.infinite = false;
      rec.decision.classes.assign(1, all);
    } else {
      const auto decision = estimate(scored);
      apply_threshold(decision, scored, round, rec);
      rec.decision = decision;
    }
    finish_round(std::move(rec));
    return finish();
  }

 private:
  void seed_query() {
    Rng rng = root_.derive("seed_query");
    const std::size_t n = std::min(cfg_.seed_size, cfg_.budget);
    auto q = query::query_random(result_.pool.unlabeled_ids(), n, rng);
    result_.seed_ids = q.ids;
    label_batch(q.ids, 0);
  }

  void label_batch(const std::vector<std::size_t>& ids, int round) {
    for (const auto id : ids) {
      const int label = oracle_.query(id, round);
      train_.x.append(result_.pool.features(id));
      train_.y.push_back(label);
    }
  }

  RoundRecord begin_round(int round) {
    RoundRecord rec;
    rec.round = round;
    rec.n_unlabeled_before = result_.pool.counts().n_unlabeled;
    val_active_before_ = result_.validation.active_count();
    return rec;
  }

  model::LinearModel train(int round, RoundRecord& rec) {
    if (train_.size() == 0) throw TrainingError("no human-labeled training data (budget or seed size is zero)");
    Rng rng = root_.derive("train", static_cast<std::uint64_t>(round));
    auto f = model::fit(train_, cfg_.train, RngSeed{rng.next_u64()});
    rec.train_size = train_.size();
    rec.train_loss = f.loss_trace.empty() ? model::objective(f.model, cfg_.train, train_) : f.loss_trace.back();
    rec.train_error = f.train_error;
    rec.single_class = f.single_class;
    result_.final_model = f.model;
    return f.model;
  }

  ScoredRound score(const model::LinearModel& m) const {
    ScoredRound s;
    const auto& pool = result_.pool;
    const auto& val = result_.validation;
    s.pool_ids = pool.unlabeled_ids();
    s.pool.reserve(s.pool_ids.size());
    for (const auto id : s.pool_ids) {
      const auto sc = confidence::score(cfg_.confidence, m, pool.features(id));
      s.pool.push_back({sc.label, sc.confidence});
    }
    s.val_ids = val.active_indices();
    s.val.reserve(s.val_ids.size());
    for (const auto i : s.val_ids) {
      const auto sc = confidence::score(cfg_.confidence, m, val.features(i));
      s.val.push_back({sc.label, sc.confidence, sc.label == val.label(i)});
    }
    if (cfg_.confidence.kind == confidence::Kind::Energy) {
      double lo = 0.0;
      for (const auto& u : s.pool) lo = std::min(lo, u.score);
      for (const auto& v : s.val) lo = std::min(lo, v.score);
      s.shift = -lo;
      for (auto& u : s.pool) u.score += s.shift;
      for (auto& v : s.val) v.score += s.shift;
    }
    return s;
  }

  threshold::ThresholdDecision estimate(const ScoredRound& s) const {
    if (cfg_.force_abstain) {
      threshold::ThresholdDecision d;
      d.per_class = cfg_.threshold.per_class;
      d.classes.assign(d.per_class ? static_cast<std::size_t>(result_.pool.num_classes()) : 1, {});
      return d;
    }
    return threshold::estimate_threshold(s.pool, s.val, result_.pool.num_classes(), cfg_.threshold);
  }

  void apply_threshold(const threshold::ThresholdDecision& d, const ScoredRound& s, int round, RoundRecord& rec) {
    rec.n_v = s.val.size();
    for (std::size_t j = 0; j < s.pool.size(); ++j) {
      const auto& u = s.pool[j];
      if (!d.accepts(u.predicted, u.score)) continue;
      const std::size_t id = s.pool_ids[j];
      result_.pool.mark_auto(id, u.predicted, round);
      rec.auto_labeled.emplace_back(id, u.predicted);
      rec.m_a += Oracle::audit(result_.pool, id) != u.predicted;
    }
    for (std::size_t j = 0; j < s.val.size(); ++j) {
      const auto& v = s.val[j];
      if (!d.accepts(v.predicted, v.score)) continue;
      result_.validation.deactivate(s.val_ids[j]);
      rec.val_deactivated.push_back(s.val_ids[j]);
      ++rec.val_accepted;
      rec.val_accepted_wrong += v.correct ? 0 : 1;
    }
    rec.n_a = rec.auto_labeled.size();
    if (cfg_.check_invariants) check_threshold_round(d, s, rec);
  }

  void label_all(const ScoredRound& s, int round, RoundRecord& rec) {
    rec.n_v = s.val.size();
    for (std::size_t j = 0; j < s.pool.size(); ++j) {
      const std::size_t id = s.pool_ids[j];
      const int label = s.pool[j].predicted;
      result_.pool.mark_auto(id, label, round);
      rec.auto_labeled.emplace_back(id, label);
      rec.m_a += Oracle::audit(result_.pool, id) != label;
    }
    rec.n_a = rec.auto_labeled.size();
  }

  std::vector<std::size_t> query_batch(const model::LinearModel& m, const ScoredRound& s, std::size_t n, int round) {
    Rng rng = root_.derive("query", static_cast<std::uint64_t>(round));
    query::QueryResult q;
    if (cfg_.query.strategy == query::Strategy::Random) {
      q = query::query_random(result_.pool.unlabeled_ids(), n, rng);
    } else {
      std::vector<query::Candidate> cands;
      cands.reserve(s.pool.size());
      for (std::size_t j = 0; j < s.pool.size(); ++j) {
        const std::size_t id = s.pool_ids[j];
        if (!result_.pool.is_unlabeled(id)) continue;
        const double v = cfg_.query.margin == query::MarginScore::Gap
                             ? confidence::logit_gap(model::logits(m, result_.pool.features(id)))
                             : s.pool[j].score;
        cands.push_back({id, v});
      }
      q = query::query_margin_random(cands, n, cfg_.query.c, rng);
    }
    label_batch(q.ids, round);
    return q.ids;
  }

  void finish_round(RoundRecord rec) {
    if (cfg_.check_invariants) check_round(rec);
    result_.n_auto += rec.n_a;
    result_.rounds.push_back(std::move(rec));
  }

  RunResult finish() {
    result_.human_labels = oracle_.queries();
    return std::move(result_);
  }

  [[noreturn]] static void violated(const RoundRecord& rec, const std::string& what) {
    throw IntegrityError("round " + std::to_string(rec.round) + ": " + what);
  }

  void check_threshold_round(const threshold::ThresholdDecision& d, const ScoredRound& s,
                             const RoundRecord& rec) const {
    // Each finite threshold satisfies its selection constraint over the
    // validation entries it was chosen on.
    const std::size_t groups = d.classes.size();
    for (std::size_t c = 0; c < groups; ++c) {
      const auto& ct = d.classes[c];
      if (ct.infinite) continue;
      std::vector<threshold::ValidationScore> sub;
      for (const auto& v : s.val) {
        if (!d.per_class || static_cast<std::size_t>(v.predicted) == c) sub.push_back(v);
      }
      if (!threshold::satisfies_constraint(ct.threshold, sub, cfg_.threshold)) {
        violated(rec, "threshold for class " + std::to_string(c) + " violates its constraint");
      }
    }
    const auto& pool = result_.pool;
    for (const auto& [id, label] : rec.auto_labeled) {
      const auto sc = std::lower_bound(s.pool_ids.begin(), s.pool_ids.end(), id) - s.pool_ids.begin();
      const auto& u = s.pool[static_cast<std::size_t>(sc)];
      if (!(u.score >= d.threshold_for(u.predicted)) || u.predicted != label) {
        violated(rec, "auto-labeled point " + std::to_string(id) + " is below its threshold");
      }
      const auto& st = pool.state(id);
      if (st.provenance != Provenance::Auto || st.label != label || st.round != rec.round) {
        violated(rec, "auto-labeled point " + std::to_string(id) + " has inconsistent state");
      }
    }
    for (const auto i : rec.val_deactivated) {
      const auto pos = std::lower_bound(s.val_ids.begin(), s.val_ids.end(), i) - s.val_ids.begin();
      const auto& v = s.val[static_cast<std::size_t>(pos)];
      if (!(v.score >= d.threshold_for(v.predicted)) || result_.validation.active(i)) {
        violated(rec, "validation point " + std::to_string(i) + " deactivated without meeting its threshold");
      }
    }
    // Every active validation point is below its threshold.
    for (std::size_t j = 0; j < s.val.size(); ++j) {
      if (result_.validation.active(s.val_ids[j]) && d.accepts(s.val[j].predicted, s.val[j].score)) {
        violated(rec, "validation point " + std::to_string(s.val_ids[j]) + " above threshold left active");
      }
    }
  }

  void check_round(const RoundRecord& rec) const {
    const auto& pool = result_.pool;
    const auto recount = partition_counts(pool);
    if (!(recount == pool.counts()) || recount.total() != pool.size()) violated(rec, "partition invariant broken");
    if (oracle_.queries() > cfg_.budget) violated(rec, "human labels exceed budget");
    if (result_.validation.active_count() > val_active_before_) violated(rec, "validation set grew");
    std::vector<std::size_t> autos;
    for (const auto& p : rec.auto_labeled) autos.push_back(p.first);
    std::sort(autos.begin(), autos.end());
    for (const auto q : rec.queried) {
      if (std::binary_search(autos.begin(), autos.end(), q)) violated(rec, "point both queried and auto-labeled");
      if (pool.state(q).provenance != Provenance::Human) violated(rec, "queried point not human labeled");
    }
    if (!rec.queried.empty() && pool.counts().n_unlabeled >= rec.n_unlabeled_before) {
      violated(rec, "pool did not drain in a querying round");
    }
  }

  RunConfig cfg_;
  Rng root_;
  RunResult result_;
  Oracle oracle_;
  LabeledData train_;
  std::size_t val_active_before_ = 0;
};

}  // namespace

RunResult run_tbal(Pool pool, ValidationSet validation, const RunConfig& cfg, RngSeed seed) {
  RunConfig c = cfg;
  c.method = Method::TBAL;
  return Runner(std::move(pool), std::move(validation), c, seed).run_tbal();
}

RunResult run_baseline(Pool pool, ValidationSet validation, const RunConfig& cfg, RngSeed seed) {
  if (cfg.method == Method::TBAL) throw ConfigError("run_baseline called with method tbal");
  return Runner(std::move(pool), std::move(validation), cfg, seed).run_baseline();
}

RunResult run(Pool pool, ValidationSet validation, const RunConfig& cfg, RngSeed seed) {
  if (cfg.method == Method::TBAL) return run_tbal(std::move(pool), std::move(validation), cfg, seed);
  return run_baseline(std::move(pool), std::move(validation), cfg, seed);
}

}  // namespace tbal::engine
