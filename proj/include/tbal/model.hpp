#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tbal/core.hpp"

namespace tbal::model {

enum class Loss { Hinge, Logistic };

const char* to_string(Loss loss) noexcept;
Loss loss_from_string(const std::string& name);

// Linear classifier. Binary models keep a single weight row w with
// margin m = <w, x> + b and predict class 1 iff m > 0; multiclass models keep
// one row per class and predict the argmax.
struct LinearModel {
  int num_classes = 2;
  std::size_t dim = 0;
  std::vector<double> weights;  // rows() x dim, row-major
  std::vector<double> bias;     // rows()
  bool normalized = false;      // binary only: ||w|| = 1, b = 0

  static LinearModel zeros(int num_classes, std::size_t dim, bool normalized = false);

  bool binary() const noexcept { return num_classes == 2; }
  std::size_t rows() const noexcept { return binary() ? 1 : static_cast<std::size_t>(num_classes); }
  std::span<const double> row(std::size_t r) const noexcept { return {weights.data() + r * dim, dim}; }
  std::span<double> row(std::size_t r) noexcept { return {weights.data() + r * dim, dim}; }
  std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }
};

struct TrainConfig {
  Loss loss = Loss::Hinge;
  std::size_t epochs = 50;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t batch_size = 32;
  double tolerance = 1e-5;
  bool normalized = false;
  bool fit_bias = true;

  void validate() const;
};

struct FitResult {
  LinearModel model;
  std::vector<double> loss_trace;  // regularized objective after each accepted epoch
  std::size_t epochs_run = 0;
  bool single_class = false;  // training labels held one class; model is constant
  double train_error = 0.0;
};

// Raw per-class scores. Binary models yield (-m, m).
std::vector<double> logits(const LinearModel& model, std::span<const double> x);
void logits_into(const LinearModel& model, std::span<const double> x, std::span<double> out);
// Binary margin m = <w, x> + b.
double margin(const LinearModel& model, std::span<const double> x);

// Argmax of the logits; ties go to the smallest class index.
int predict(const LinearModel& model, std::span<const double> x);

// Per-example surrogate loss and its (sub)gradient with respect to
// [weights..., bias...], excluding regularization.
double example_loss(const LinearModel& model, Loss loss, std::span<const double> x, int y);
std::vector<double> example_gradient(const LinearModel& model, Loss loss, std::span<const double> x, int y);

// Regularized mean surrogate loss over a dataset.
double objective(const LinearModel& model, const TrainConfig& cfg, const LabeledData& train);

// Mini-batch SGD with per-epoch shuffling. An epoch that increases the
// objective is rolled back and the step size halved, so loss_trace is
// non-increasing. Stops once an accepted epoch improves by less than
// cfg.tolerance.
FitResult fit(const LabeledData& train, const TrainConfig& cfg, RngSeed seed);

double error_rate(const LinearModel& model, const LabeledData& data);

void save(const LinearModel& model, std::ostream& out);
LinearModel load(std::istream& in);

}  // namespace tbal::model
