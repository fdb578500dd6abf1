#include "tbal/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "tbal/error.hpp"

namespace tbal::experiment {

const char* to_string(SweepAxis axis) noexcept {
  return axis == SweepAxis::TrainBudget ? "train_budget" : "validation_size";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericError("cannot format value");
  return std::string(buf, end);
}

// --- config ---------------------------------------------------------------

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1 << ":" << node.Mark().column + 1;
    os << ": " << field << ": " << what;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
  }

  // Rejects keys outside the allowed set.
  void check_keys(const YAML::Node& node, const std::string& field, std::initializer_list<const char*> allowed) const {
    require_map(node, field);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, join(field, key), "unknown key");
    }
  }

  template <typename T>
  void get(const YAML::Node& parent, const char* key, const std::string& field, T& out) const {
    const YAML::Node node = parent[key];
    if (!node) return;
    const auto path = join(field, key);
    if (!node.IsScalar()) fail(node, path, "expected a scalar");
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        const auto s = node.as<std::string>();
        if (!s.empty() && s[0] == '-') fail(node, path, "must be non-negative");
        out = node.as<T>();
      } else {
        out = node.as<T>();
      }
    } catch (const YAML::Exception&) {
      fail(node, path, "cannot parse '" + node.as<std::string>() + "'");
    }
  }

  template <typename E, typename F>
  void get_enum(const YAML::Node& parent, const char* key, const std::string& field, E& out, F parse) const {
    std::string name;
    get(parent, key, field, name);
    if (name.empty()) return;
    try {
      out = parse(name);
    } catch (const Error& e) {
      fail(parent[key], join(field, key), e.what());
    }
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  std::string source_;
};

void read_train(const Reader& r, const YAML::Node& n, model::TrainConfig& t) {
  const std::string f = "run.train";
  r.check_keys(n, f, {"loss", "epochs", "learning_rate", "l2", "batch_size", "tolerance", "normalized", "fit_bias"});
  r.get_enum(n, "loss", f, t.loss, model::loss_from_string);
  r.get(n, "epochs", f, t.epochs);
  r.get(n, "learning_rate", f, t.learning_rate);
  r.get(n, "l2", f, t.l2);
  r.get(n, "batch_size", f, t.batch_size);
  r.get(n, "tolerance", f, t.tolerance);
  r.get(n, "normalized", f, t.normalized);
  r.get(n, "fit_bias", f, t.fit_bias);
}

void read_run(const Reader& r, const YAML::Node& n, ExperimentConfig& cfg) {
  const std::string f = "run";
  r.check_keys(n, f, {"epsilon_a", "budget", "validation_size", "seed_fraction", "batch_fraction", "seed_size",
                      "batch_size", "check_invariants", "confidence", "threshold", "query", "train"});
  auto& run = cfg.run;
  r.get(n, "epsilon_a", f, run.threshold.epsilon_a);
  r.get(n, "budget", f, run.budget);
  r.get(n, "validation_size", f, cfg.validation_size);
  r.get(n, "seed_fraction", f, cfg.seed_fraction);
  r.get(n, "batch_fraction", f, cfg.batch_fraction);
  if (n["seed_size"]) {
    std::size_t v = 0;
    r.get(n, "seed_size", f, v);
    cfg.seed_size = v;
  }
  if (n["batch_size"]) {
    std::size_t v = 0;
    r.get(n, "batch_size", f, v);
    cfg.batch_size = v;
  }
  r.get(n, "check_invariants", f, run.check_invariants);
  if (const auto c = n["confidence"]) {
    r.check_keys(c, "run.confidence", {"kind", "temperature"});
    r.get_enum(c, "kind", "run.confidence", run.confidence.kind, confidence::kind_from_string);
    r.get(c, "temperature", "run.confidence", run.confidence.temperature);
  }
  if (const auto t = n["threshold"]) {
    const std::string tf = "run.threshold";
    r.check_keys(t, tf, {"n0", "sigma", "delta", "per_class"});
    r.get(t, "n0", tf, run.threshold.n0);
    r.get_enum(t, "sigma", tf, run.threshold.sigma_kind, threshold::sigma_kind_from_string);
    r.get(t, "delta", tf, run.threshold.delta);
    r.get(t, "per_class", tf, run.threshold.per_class);
  }
  if (const auto q = n["query"]) {
    const std::string qf = "run.query";
    r.check_keys(q, qf, {"strategy", "c", "margin"});
    r.get_enum(q, "strategy", qf, run.query.strategy, query::strategy_from_string);
    r.get(q, "c", qf, run.query.c);
    r.get_enum(q, "margin", qf, run.query.margin, query::margin_score_from_string);
  }
  if (const auto t = n["train"]) read_train(r, t, run.train);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  const Reader r(source);
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  r.check_keys(root, "", {"name", "dataset", "methods", "run", "sweep", "workers", "output"});
  r.get(root, "name", "", cfg.name);
  r.get(root, "workers", "", cfg.workers);
  std::string out;
  r.get(root, "output", "", out);
  if (!out.empty()) cfg.output_dir = out;

  if (const auto d = root["dataset"]) {
    const std::string f = "dataset";
    r.check_keys(d, f, {"kind", "dim", "n_total", "pool_size", "val_size", "radius", "images", "labels"});
    r.get_enum(d, "kind", f, cfg.dataset.kind, data::dataset_kind_from_string);
    r.get(d, "dim", f, cfg.dataset.dim);
    r.get(d, "n_total", f, cfg.dataset.n_total);
    r.get(d, "pool_size", f, cfg.dataset.pool_size);
    r.get(d, "val_size", f, cfg.dataset.val_size);
    r.get(d, "radius", f, cfg.dataset.xor_radius);
    std::string images, labels;
    r.get(d, "images", f, images);
    r.get(d, "labels", f, labels);
    cfg.dataset.mnist_images = images;
    cfg.dataset.mnist_labels = labels;
  }
  if (const auto m = root["methods"]) {
    if (!m.IsSequence() || m.size() == 0) r.fail(m, "methods", "expected a non-empty list");
    cfg.methods.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      engine::Method method{};
      const YAML::Node item = m[i];
      if (!item.IsScalar()) r.fail(item, "methods", "expected a method name");
      try {
        method = engine::method_from_string(item.as<std::string>());
      } catch (const Error& e) {
        r.fail(item, "methods[" + std::to_string(i) + "]", e.what());
      }
      if (std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end())
        r.fail(item, "methods", "duplicate method");
      cfg.methods.push_back(method);
    }
  }
  if (const auto run = root["run"]) read_run(r, run, cfg);
  if (const auto s = root["sweep"]) {
    const std::string f = "sweep";
    r.check_keys(s, f, {"axis", "values", "trials", "seed"});
    std::string axis;
    r.get(s, "axis", f, axis);
    if (axis == "train_budget") cfg.axis = SweepAxis::TrainBudget;
    else if (axis == "validation_size") cfg.axis = SweepAxis::ValidationSize;
    else if (!axis.empty()) r.fail(s["axis"], "sweep.axis", "expected train_budget or validation_size");
    if (const auto v = s["values"]) {
      if (!v.IsSequence() || v.size() == 0) r.fail(v, "sweep.values", "expected a non-empty list");
      cfg.grid.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t value = 0;
        if (!v[i].IsScalar()) r.fail(v[i], "sweep.values", "expected an integer");
        try {
          const auto str = v[i].as<std::string>();
          if (!str.empty() && str[0] == '-') throw YAML::Exception(v[i].Mark(), "negative");
          value = v[i].as<std::size_t>();
        } catch (const YAML::Exception&) {
          r.fail(v[i], "sweep.values[" + std::to_string(i) + "]", "expected a non-negative integer");
        }
        cfg.grid.push_back(value);
      }
    }
    r.get(s, "trials", f, cfg.trials);
    r.get(s, "seed", f, cfg.seed_base);
  }
  if (!root["sweep"] || !root["sweep"]["values"]) {
    cfg.grid = {cfg.axis == SweepAxis::TrainBudget ? cfg.run.budget : cfg.validation_size};
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.string());
}

void ExperimentConfig::validate() const {
  dataset.validate();
  if (methods.empty()) throw ConfigError("methods: at least one method required");
  if (grid.empty()) throw ConfigError("sweep.values: at least one value required");
  if (trials == 0) throw ConfigError("sweep.trials: must be positive");
  if (workers == 0) throw ConfigError("workers: must be positive");
  if (!(seed_fraction > 0.0 && seed_fraction <= 1.0)) throw ConfigError("run.seed_fraction: must be in (0, 1]");
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) throw ConfigError("run.batch_fraction: must be in (0, 1]");
  for (const auto v : grid) {
    if (v == 0) throw ConfigError("sweep.values: values must be positive");
    if (validation_size_for(v) > dataset.val_size)
      throw ConfigError("validation size " + std::to_string(validation_size_for(v)) + " exceeds dataset.val_size " +
                        std::to_string(dataset.val_size));
    for (const auto m : methods) run_config(m, v).validate();
  }
}

std::size_t ExperimentConfig::validation_size_for(std::size_t axis_value) const {
  return axis == SweepAxis::ValidationSize ? axis_value : validation_size;
}

engine::RunConfig ExperimentConfig::run_config(engine::Method method, std::size_t axis_value) const {
  engine::RunConfig rc = run;
  rc.method = method;
  if (axis == SweepAxis::TrainBudget) rc.budget = axis_value;
  const auto nq = static_cast<double>(rc.budget);
  rc.seed_size = seed_size ? *seed_size : static_cast<std::size_t>(std::llround(seed_fraction * nq));
  rc.batch_size = batch_size ? *batch_size : static_cast<std::size_t>(std::llround(batch_fraction * nq));
  rc.seed_size = std::clamp<std::size_t>(rc.seed_size, 1, rc.budget);
  rc.batch_size = std::max<std::size_t>(rc.batch_size, 1);
  return rc;
}

// --- sweep ----------------------------------------------------------------

std::pair<Pool, ValidationSet> prepare_trial(const ExperimentConfig& cfg, const LabeledData* shared, std::uint64_t seed) {
  if (shared) return data::split_pool_val(*shared, cfg.dataset.pool_size, cfg.dataset.val_size, RngSeed{seed});
  const auto points = data::make_dataset(cfg.dataset, RngSeed{seed});
  return data::split_pool_val(points, cfg.dataset.pool_size, cfg.dataset.val_size, RngSeed{seed});
}

ValidationSet subsample_validation(const ValidationSet& pool, std::size_t n, std::uint64_t seed) {
  if (n > pool.size()) throw ConfigError("validation subset larger than validation pool");
  if (n == pool.size()) return ValidationSet(pool.data());
  // Partial Fisher-Yates draws are prefix-stable, so smaller subsets nest.
  auto idx = Rng(RngSeed{seed}).derive("val_subsample").sample_indices(pool.size(), n);
  return ValidationSet(pool.data().subset(idx));
}

SweepResult run_experiment(const ExperimentConfig& cfg, const RunObserver& observer) {
  cfg.validate();

  // MNIST is loaded once; synthetic sets are drawn per trial seed.
  std::unique_ptr<LabeledData> shared;
  if (cfg.dataset.kind == data::DatasetKind::MnistLinear)
    shared = std::make_unique<LabeledData>(data::make_dataset(cfg.dataset, RngSeed{cfg.seed_base}));

  struct Trial {
    std::uint64_t seed;
    Pool pool;
    ValidationSet val;
  };
  std::vector<Trial> trials;
  trials.reserve(cfg.trials);
  for (std::size_t j = 0; j < cfg.trials; ++j) {
    const std::uint64_t seed = cfg.seed_base + j;
    auto [pool, val] = prepare_trial(cfg, shared.get(), seed);
    trials.push_back({seed, std::move(pool), std::move(val)});
  }

  struct Job {
    std::size_t method_index, grid_index, trial;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m)
    for (std::size_t g = 0; g < cfg.grid.size(); ++g)
      for (std::size_t t = 0; t < cfg.trials; ++t) jobs.push_back({m, g, t});

  SweepResult out;
  out.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const auto& job = jobs[i];
      const auto& trial = trials[job.trial];
      RunRow row;
      row.method = cfg.methods[job.method_index];
      row.axis_value = cfg.grid[job.grid_index];
      row.seed = trial.seed;
      try {
        const auto rc = cfg.run_config(row.method, row.axis_value);
        auto val = subsample_validation(trial.val, cfg.validation_size_for(row.axis_value), trial.seed);
        const auto result = engine::run(trial.pool, std::move(val), rc, RngSeed{trial.seed});
        row.report = metrics::evaluate(result);
        std::lock_guard lock(sink);
        out.rows[i] = row;
        if (observer) observer(row, result);
      } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
        std::lock_guard lock(sink);
        out.rows[i] = row;
      }
    }
  };
  const std::size_t n_workers = std::min(cfg.workers, std::max<std::size_t>(jobs.size(), 1));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  for (const auto& row : out.rows) out.all_ok = out.all_ok && row.ok;

  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
      std::vector<metrics::MetricReport> reports;
      const std::size_t base = (m * cfg.grid.size() + g) * cfg.trials;
      for (std::size_t t = 0; t < cfg.trials; ++t)
        if (out.rows[base + t].ok) reports.push_back(out.rows[base + t].report);
      SummaryRow s;
      s.method = cfg.methods[m];
      s.axis_value = cfg.grid[g];
      s.trials = reports.size();
      s.stats = metrics::summarize_trials(reports);
      out.summary.push_back(s);
    }
  }
  return out;
}

// --- output ---------------------------------------------------------------

void write_runs_csv(std::ostream& out, const SweepResult& result) {
  out << "method,axis_value,seed,err_hat,cov_hat,human_labels,val_labels,rounds\n";
  for (const auto& row : result.rows) {
    if (!row.ok) continue;
    const auto& r = row.report;
    out << engine::to_string(row.method) << ',' << row.axis_value << ',' << row.seed << ','
        << (r.err_hat ? format_double(*r.err_hat) : "") << ',' << format_double(r.cov_hat) << ','
        << r.human_labels << ',' << r.val_labels << ',' << r.rounds << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "method,axis_value,trials,err_hat_mean,err_hat_std,cov_hat_mean,cov_hat_std,human_labels_mean,"
         "human_labels_std,val_labels_mean,val_labels_std,rounds_mean,rounds_std\n";
  auto pair = [&](const metrics::Summary& s) {
    if (s.count == 0) return std::string(",");
    return format_double(s.mean) + ',' + format_double(s.std);
  };
  for (const auto& row : result.summary) {
    const auto& s = row.stats;
    out << engine::to_string(row.method) << ',' << row.axis_value << ',' << row.trials << ',' << pair(s.err_hat)
        << ',' << pair(s.cov_hat) << ',' << pair(s.human_labels) << ',' << pair(s.val_labels) << ','
        << pair(s.rounds) << '\n';
  }
}

void write_outputs(const ExperimentConfig& cfg, const SweepResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw InputError("cannot create " + cfg.output_dir.string() + ": " + ec.message());
  std::ofstream runs(cfg.output_dir / "runs.csv");
  std::ofstream summary(cfg.output_dir / "summary.csv");
  if (!runs || !summary) throw InputError("cannot write to " + cfg.output_dir.string());
  write_runs_csv(runs, result);
  write_summary_csv(summary, result);
}

void export_dataset(const engine::RunResult& result, std::ostream& out, bool include_features) {
  const auto& pool = result.pool;
  out << "id,label,provenance,round";
  if (include_features)
    for (std::size_t j = 0; j < pool.dim(); ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t id = 0; id < pool.size(); ++id) {
    const auto& s = pool.state(id);
    out << id << ',' << s.label << ',' << to_string(s.provenance) << ',' << s.round;
    if (include_features)
      for (const double v : pool.features(id)) out << ',' << format_double(v);
    out << '\n';
  }
}

void export_dataset(const engine::RunResult& result, const std::filesystem::path& path, bool include_features) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw InputError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  export_dataset(result, out, include_features);
}

}  // namespace tbal::experiment
