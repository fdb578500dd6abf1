// tbal: run auto-labeling sweeps, generate datasets, evaluate bounds.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tbal/data.hpp"
#include "tbal/error.hpp"
#include "tbal/experiment.hpp"
#include "tbal/theory.hpp"

namespace {

using tbal::experiment::format_double;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

tbal::experiment::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto cfg = tbal::experiment::load_config(path);
  if (o.seed) cfg.seed_base = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out) cfg.output_dir = *o.out;
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& config, const Overrides& o, bool quiet) {
  const auto cfg = load(config, o);
  std::size_t done = 0;
  const std::size_t total = cfg.methods.size() * cfg.grid.size() * cfg.trials;
  auto progress = [&](const tbal::experiment::RunRow& row, const tbal::engine::RunResult&) {
    ++done;
    if (!quiet)
      std::cerr << "[" << done << "/" << total << "] " << tbal::engine::to_string(row.method) << " "
                << tbal::experiment::to_string(cfg.axis) << "=" << row.axis_value << " seed=" << row.seed
                << " cov=" << format_double(row.report.cov_hat) << "\n";
  };
  const auto result = tbal::experiment::run_experiment(cfg, progress);
  tbal::experiment::write_outputs(cfg, result);
  tbal::experiment::write_summary_csv(std::cout, result);
  if (!result.all_ok) {
    for (const auto& row : result.rows)
      if (!row.ok)
        std::cerr << "error: " << tbal::engine::to_string(row.method) << " value=" << row.axis_value
                  << " seed=" << row.seed << ": " << row.error << "\n";
    return kExitFailure;
  }
  return 0;
}

int cmd_export(const std::string& config, const Overrides& o, const std::string& method_name,
               std::optional<std::size_t> value, const std::string& path, bool features) {
  auto cfg = load(config, o);
  const auto method = method_name.empty() ? cfg.methods.front() : tbal::engine::method_from_string(method_name);
  const std::size_t axis_value = value ? *value : cfg.grid.front();
  const auto rc = cfg.run_config(method, axis_value);
  std::unique_ptr<tbal::LabeledData> shared;
  if (cfg.dataset.kind == tbal::data::DatasetKind::MnistLinear)
    shared = std::make_unique<tbal::LabeledData>(tbal::data::make_dataset(cfg.dataset, tbal::RngSeed{cfg.seed_base}));
  auto [pool, val_pool] = tbal::experiment::prepare_trial(cfg, shared.get(), cfg.seed_base);
  auto val = tbal::experiment::subsample_validation(val_pool, cfg.validation_size_for(axis_value), cfg.seed_base);
  const auto result = tbal::engine::run(std::move(pool), std::move(val), rc, tbal::RngSeed{cfg.seed_base});
  tbal::experiment::export_dataset(result, path, features);
  const auto c = result.pool.counts();
  std::cout << "auto " << c.n_auto << " human " << c.n_human << " unlabeled " << c.n_unlabeled << "\n";
  return 0;
}

int cmd_gen(const std::string& kind, std::size_t n, std::size_t dim, double radius, std::uint64_t seed,
            const std::string& path) {
  const auto k = tbal::data::dataset_kind_from_string(kind);
  tbal::LabeledData d;
  if (k == tbal::data::DatasetKind::UnitBall) d = tbal::data::gen_unit_ball(dim, n, tbal::RngSeed{seed});
  else if (k == tbal::data::DatasetKind::Xor) d = tbal::data::gen_xor(n, radius, tbal::RngSeed{seed});
  else throw tbal::ConfigError("gen supports unit_ball and xor");
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw tbal::InputError("cannot write " + path);
    out = &file;
  }
  *out << "id,label";
  for (std::size_t j = 0; j < d.dim(); ++j) *out << ",x" << j;
  *out << "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    *out << i << ',' << d.y[i];
    for (const double v : d.x.row(i)) *out << ',' << format_double(v);
    *out << "\n";
  }
  return 0;
}

// "n_v:n_a:err" triples.
std::vector<tbal::theory::RoundInput> parse_rounds(const std::vector<std::string>& items) {
  std::vector<tbal::theory::RoundInput> rounds;
  for (const auto& item : items) {
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    tbal::theory::RoundInput r;
    char c1 = 0, c2 = 0;
    if (!(is >> r.n_v >> c1 >> r.n_a >> c2 >> r.val_error) || c1 != ':' || c2 != ':' || !is.eof())
      throw tbal::ConfigError("--round expects n_v:n_a:err, got '" + item + "'");
    rounds.push_back(r);
  }
  return rounds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold-based auto-labeling"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run an experiment sweep from a YAML config");
  run->add_option("--config,-c", config, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", o.seed, "Override sweep.seed");
  run->add_option("--workers", o.workers, "Override workers");
  run->add_option("--out", o.out, "Override output directory");
  run->add_flag("--quiet,-q", quiet, "No progress on stderr");

  std::string method, export_path;
  std::optional<std::size_t> value;
  bool features = false;
  auto* exp = app.add_subcommand("export", "Run once and write the labeled pool as CSV");
  exp->add_option("--config,-c", config, "Experiment config")->required()->check(CLI::ExistingFile);
  exp->add_option("--seed", o.seed, "Run seed (default sweep.seed)");
  exp->add_option("--method", method, "Method (default first listed)");
  exp->add_option("--value", value, "Sweep value (default first listed)");
  exp->add_option("--out", export_path, "Output CSV")->required();
  exp->add_flag("--features", features, "Include feature columns");

  std::string kind = "unit_ball", gen_out;
  std::size_t n = 1000, dim = 30;
  double radius = 1.0;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset as CSV");
  gen->add_option("--kind", kind, "unit_ball or xor");
  gen->add_option("--n", n, "Number of points");
  gen->add_option("--dim", dim, "Dimension (unit_ball)");
  gen->add_option("--radius", radius, "Disk radius (xor)");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output CSV (default stdout)");

  auto* bounds = app.add_subcommand("bounds", "Evaluate theoretical quantities");
  bounds->require_subcommand(1);
  double b_n = 0, b_d = 1, b_delta = 0.05, b_p0 = 0.5, b_t = 0, g1 = 0, g2 = 0, b_sigma = 0, b_eps = 0;
  std::size_t b_k = 1, b_auto = 0;
  std::vector<std::string> round_items;
  auto* rad = bounds->add_subcommand("rademacher", "VC Rademacher complexity");
  rad->add_option("--n", b_n)->required();
  rad->add_option("--d", b_d)->required();
  auto* err = bounds->add_subcommand("error", "Auto-labeling error bound");
  err->add_option("--d", b_d)->required();
  err->add_option("--delta", b_delta);
  err->add_option("--p0", b_p0)->required();
  err->add_option("--round", round_items, "n_v:n_a:err, one per round")->required();
  err->add_option("--n-auto", b_auto, "N_a (default: sum of n_a)");
  auto* cov = bounds->add_subcommand("coverage", "Coverage lower bound for linear classifiers");
  cov->add_option("--t-min", b_t)->required();
  cov->add_option("--d", b_d)->required();
  cov->add_option("--k", b_k)->required();
  cov->add_option("--n", b_n)->required();
  cov->add_option("--delta", b_delta);
  auto* band = bounds->add_subcommand("band", "Band probability bound on the unit ball");
  band->add_option("--gamma1", g1)->required();
  band->add_option("--gamma2", g2)->required();
  band->add_option("--d", b_d)->required();
  auto* minval = bounds->add_subcommand("min-val", "Minimum validation size");
  minval->add_option("--sigma", b_sigma)->required();
  minval->add_option("--epsilon", b_eps)->required();
  tbal::theory::McConfig mc;
  auto* mcc = bounds->add_subcommand("mc", "Monte-Carlo check of the error bound");
  mcc->add_option("--dim", mc.dim);
  mcc->add_option("--pool", mc.pool_size);
  mcc->add_option("--val", mc.val_size);
  mcc->add_option("--trials", mc.trials);
  mcc->add_option("--seed", mc.seed_base);
  mcc->add_option("--delta", mc.delta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, o, quiet);
    if (*exp) return cmd_export(config, o, method, value, export_path, features);
    if (*gen) return cmd_gen(kind, n, dim, radius, gen_seed, gen_out);
    std::cout.imbue(std::locale::classic());
    if (*rad) std::cout << format_double(tbal::theory::rademacher_vc(b_n, b_d)) << "\n";
    if (*err) {
      tbal::theory::BoundInputs in;
      in.d = b_d;
      in.delta = b_delta;
      in.p0 = b_p0;
      in.rounds = parse_rounds(round_items);
      in.k = in.rounds.size();
      in.n_auto = b_auto;
      if (in.n_auto == 0)
        for (const auto& r : in.rounds) in.n_auto += r.n_a;
      std::cout << format_double(tbal::theory::error_bound_vc(in)) << "\n";
    }
    if (*cov) std::cout << format_double(tbal::theory::coverage_bound_linear(b_t, b_d, b_k, b_n, b_delta)) << "\n";
    if (*band) std::cout << format_double(tbal::theory::band_probability_bound(g1, g2, b_d)) << "\n";
    if (*minval) std::cout << tbal::theory::min_validation_size(b_sigma, b_eps) << "\n";
    if (*mcc) {
      const auto rep = tbal::theory::verify_error_bound_mc(mc);
      std::cout << "trials " << rep.trials << " non_vacuous " << rep.non_vacuous << " violations " << rep.violations
                << " rate " << format_double(rep.violation_rate) << " allowed " << format_double(rep.allowed_rate)
                << (rep.passed ? " ok" : " FAILED") << "\n";
      return rep.passed ? 0 : kExitFailure;
    }
    return 0;
  } catch (const tbal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tbal::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tbal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
