#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tbal/data.hpp"
#include "tbal/engine.hpp"
#include "tbal/metrics.hpp"

namespace tbal::experiment {

enum class SweepAxis { TrainBudget, ValidationSize };

const char* to_string(SweepAxis axis) noexcept;

struct ExperimentConfig {
  std::string name = "experiment";
  data::DatasetSpec dataset;
  std::vector<engine::Method> methods{engine::Method::TBAL};
  engine::RunConfig run;  // budget, seed and batch sizes are filled per grid point
  std::size_t validation_size = 4000;  // N_v when the sweep varies the budget
  double seed_fraction = 0.2;          // n_s = seed_fraction * N_q
  double batch_fraction = 0.05;        // n_b = batch_fraction * N_q
  std::optional<std::size_t> seed_size;
  std::optional<std::size_t> batch_size;
  SweepAxis axis = SweepAxis::TrainBudget;
  std::vector<std::size_t> grid{500};
  std::size_t trials = 10;
  std::uint64_t seed_base = 0;
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";

  void validate() const;
  // Run configuration for one (method, grid value) cell.
  engine::RunConfig run_config(engine::Method method, std::size_t axis_value) const;
  std::size_t validation_size_for(std::size_t axis_value) const;
};

// Parses the YAML experiment schema. Unknown keys, wrong types and invalid
// values raise ConfigError naming the source, line and field.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunRow {
  engine::Method method = engine::Method::TBAL;
  std::size_t axis_value = 0;
  std::uint64_t seed = 0;
  metrics::MetricReport report;
  bool ok = true;
  std::string error;
};

struct SummaryRow {
  engine::Method method = engine::Method::TBAL;
  std::size_t axis_value = 0;
  std::size_t trials = 0;
  metrics::TrialSummary stats;
};

struct SweepResult {
  std::vector<RunRow> rows;  // sorted by (method order, axis value, seed)
  std::vector<SummaryRow> summary;
  bool all_ok = true;
};

// Called once per finished run, from the worker that ran it, with access to
// the full result. Calls are serialized.
using RunObserver = std::function<void(const RunRow&, const engine::RunResult&)>;

// Pool and validation pool for one trial seed.
std::pair<Pool, ValidationSet> prepare_trial(const ExperimentConfig& cfg, const LabeledData* shared, std::uint64_t seed);

// Validation subset of size n drawn from the trial's validation pool; the
// subsets for increasing n are nested.
ValidationSet subsample_validation(const ValidationSet& pool, std::size_t n, std::uint64_t seed);

SweepResult run_experiment(const ExperimentConfig& cfg, const RunObserver& observer = {});

void write_runs_csv(std::ostream& out, const SweepResult& result);
void write_summary_csv(std::ostream& out, const SweepResult& result);
// Writes runs.csv and summary.csv under cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg, const SweepResult& result);

// One row per pool point: id,label,provenance,round[,x0,...]. Label is -1 for
// unlabeled points.
void export_dataset(const engine::RunResult& result, std::ostream& out, bool include_features = false);
void export_dataset(const engine::RunResult& result, const std::filesystem::path& path, bool include_features = false);

// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

}  // namespace tbal::experiment
