#include "tbal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tbal::metrics {

MetricReport evaluate(const engine::RunResult& result, const Pool& pool) {
  const Pool& run_pool = result.pool;
  if (!run_pool.same_points(pool)) throw IntegrityError("result was produced from a different pool");

  MetricReport rep;
  rep.n = run_pool.size();
  for (std::size_t id = 0; id < run_pool.size(); ++id) {
    const auto& st = run_pool.state(id);
    if (st.provenance != Provenance::Auto) continue;
    ++rep.n_auto;
    rep.mistakes += st.label != Oracle::audit(run_pool, id);
  }
  std::size_t round_auto = 0;
  std::size_t round_mistakes = 0;
  for (const auto& r : result.rounds) {
    rep.per_round.push_back({r.n_a, r.m_a, r.val_error()});
    round_auto += r.n_a;
    round_mistakes += r.m_a;
  }
  if (round_auto != rep.n_auto || round_mistakes != rep.mistakes || result.n_auto != rep.n_auto) {
    throw IntegrityError("per-round auto-label records (" + std::to_string(round_auto) + " labels, " +
                         std::to_string(round_mistakes) + " mistakes) disagree with pool states (" +
                         std::to_string(rep.n_auto) + ", " + std::to_string(rep.mistakes) + ")");
  }
  if (rep.n_auto > 0) rep.err_hat = static_cast<double>(rep.mistakes) / static_cast<double>(rep.n_auto);
  rep.cov_hat = rep.n == 0 ? 0.0 : static_cast<double>(rep.n_auto) / static_cast<double>(rep.n);
  rep.human_labels = result.human_labels;
  rep.val_labels = result.val_size;
  rep.rounds = result.k();
  return rep;
}

MetricReport evaluate(const engine::RunResult& result) { return evaluate(result, result.pool); }

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = std::nan("");
    s.std = std::nan("");
    return s;
  }
  // Sorted accumulation makes the result independent of input order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  values = sorted;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

TrialSummary summarize_trials(std::span<const MetricReport> reports) {
  std::vector<double> err, cov, human, val, rounds;
  for (const auto& r : reports) {
    if (r.err_hat) err.push_back(*r.err_hat);
    cov.push_back(r.cov_hat);
    human.push_back(static_cast<double>(r.human_labels));
    val.push_back(static_cast<double>(r.val_labels));
    rounds.push_back(static_cast<double>(r.rounds));
  }
  return {summarize(err), summarize(cov), summarize(human), summarize(val), summarize(rounds)};
}

}  // namespace tbal::metrics
