#include "tbal/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <locale>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tbal::model {

const char* to_string(Loss loss) noexcept { return loss == Loss::Hinge ? "hinge" : "logistic"; }

Loss loss_from_string(const std::string& name) {
  if (name == "hinge") return Loss::Hinge;
  if (name == "logistic" || name == "multinomial_logistic") return Loss::Logistic;
  throw ConfigError("unknown loss '" + name + "' (expected hinge or logistic)");
}

LinearModel LinearModel::zeros(int num_classes, std::size_t dim, bool normalized) {
  LinearModel m;
  m.num_classes = num_classes;
  m.dim = dim;
  m.normalized = normalized && num_classes == 2;
  m.weights.assign(m.rows() * dim, 0.0);
  m.bias.assign(m.rows(), 0.0);
  return m;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(l2 >= 0.0)) throw ConfigError("train.l2 must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(tolerance >= 0.0)) throw ConfigError("train.tolerance must be >= 0");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dim(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw InputError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(model.dim));
  }
}

double log1p_exp(double v) noexcept { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double sigmoid(double v) noexcept {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// Adds scale * d(loss)/d(params) into grad. Returns the example loss.
double accumulate_gradient(const LinearModel& model, Loss loss, std::span<const double> x, int y,
                           std::span<double> grad, double scale, std::vector<double>& z) {
  const std::size_t d = model.dim;
  const std::size_t wsize = model.weights.size();
  if (model.binary()) {
    const double s = y == 1 ? 1.0 : -1.0;
    const double m = dot(model.row(0), x) + model.bias[0];
    double coef = 0.0;
    double value = 0.0;
    if (loss == Loss::Hinge) {
      value = std::max(0.0, 1.0 - s * m);
      if (s * m < 1.0) coef = -s;
    } else {
      value = log1p_exp(-s * m);
      coef = -s * sigmoid(-s * m);
    }
    if (coef != 0.0) {
      for (std::size_t j = 0; j < d; ++j) grad[j] += scale * coef * x[j];
      grad[wsize] += scale * coef;
    }
    return value;
  }

  const auto k = static_cast<std::size_t>(model.num_classes);
  z.resize(k);
  logits_into(model, x, z);
  const auto yi = static_cast<std::size_t>(y);
  if (loss == Loss::Logistic) {
    const double zmax = *std::max_element(z.begin(), z.end());
    const double zy = z[yi];
    double sum = 0.0;
    for (auto& v : z) {
      v = std::exp(v - zmax);
      sum += v;
    }
    const double value = std::log(sum) + zmax - zy;
    for (std::size_t c = 0; c < k; ++c) {
      const double coef = z[c] / sum - (c == yi ? 1.0 : 0.0);
      if (coef == 0.0) continue;
      double* g = grad.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) g[j] += scale * coef * x[j];
      grad[wsize + c] += scale * coef;
    }
    return value;
  }

  // Multiclass hinge against the strongest competing class.
  std::size_t rival = yi == 0 ? 1 : 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (c != yi && z[c] > z[rival]) rival = c;
  }
  const double value = std::max(0.0, 1.0 + z[rival] - z[yi]);
  if (value > 0.0) {
    double* gr = grad.data() + rival * d;
    double* gy = grad.data() + yi * d;
    for (std::size_t j = 0; j < d; ++j) {
      gr[j] += scale * x[j];
      gy[j] -= scale * x[j];
    }
    grad[wsize + rival] += scale;
    grad[wsize + yi] -= scale;
  }
  return value;
}

void project_unit(LinearModel& model) {
  double n2 = 0.0;
  for (const double w : model.weights) n2 += w * w;
  if (n2 > 0.0) {
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& w : model.weights) w *= inv;
  }
  model.bias[0] = 0.0;
}

}  // namespace

void logits_into(const LinearModel& model, std::span<const double> x, std::span<double> out) {
  check_dim(model, x);
  if (model.binary()) {
    const double m = dot(model.row(0), x) + model.bias[0];
    out[0] = -m;
    out[1] = m;
    return;
  }
  for (std::size_t c = 0; c < model.rows(); ++c) out[c] = dot(model.row(c), x) + model.bias[c];
}

std::vector<double> logits(const LinearModel& model, std::span<const double> x) {
  std::vector<double> z(static_cast<std::size_t>(model.num_classes));
  logits_into(model, x, z);
  return z;
}

double margin(const LinearModel& model, std::span<const double> x) {
  check_dim(model, x);
  if (!model.binary()) throw InputError("margin() requires a binary model");
  return dot(model.row(0), x) + model.bias[0];
}

int predict(const LinearModel& model, std::span<const double> x) {
  if (model.binary()) return margin(model, x) > 0.0 ? 1 : 0;
  const auto z = logits(model, x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double example_loss(const LinearModel& model, Loss loss, std::span<const double> x, int y) {
  check_dim(model, x);
  std::vector<double> scratch(model.parameter_count(), 0.0);
  std::vector<double> z;
  return accumulate_gradient(model, loss, x, y, scratch, 1.0, z);
}

std::vector<double> example_gradient(const LinearModel& model, Loss loss, std::span<const double> x, int y) {
  check_dim(model, x);
  std::vector<double> grad(model.parameter_count(), 0.0);
  std::vector<double> z;
  accumulate_gradient(model, loss, x, y, grad, 1.0, z);
  return grad;
}

double objective(const LinearModel& model, const TrainConfig& cfg, const LabeledData& train) {
  std::vector<double> scratch(model.parameter_count(), 0.0);
  std::vector<double> z;
  double total = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    total += accumulate_gradient(model, cfg.loss, train.x.row(i), train.y[i], scratch, 0.0, z);
  }
  double reg = 0.0;
  if (!model.normalized) {
    for (const double w : model.weights) reg += w * w;
  }
  return total / static_cast<double>(train.size()) + 0.5 * cfg.l2 * reg;
}

double error_rate(const LinearModel& model, const LabeledData& data) {
  if (data.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) wrong += predict(model, data.x.row(i)) != data.y[i];
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

FitResult fit(const LabeledData& train, const TrainConfig& cfg, RngSeed seed) {
  cfg.validate();
  if (train.size() == 0) throw TrainingError("empty training set");
  train.validate();

  FitResult out;
  const bool normalized = cfg.normalized && train.num_classes == 2;
  out.model = LinearModel::zeros(train.num_classes, train.dim(), normalized);
  LinearModel& model = out.model;

  std::vector<std::size_t> present(static_cast<std::size_t>(train.num_classes), 0);
  for (const int y : train.y) ++present[static_cast<std::size_t>(y)];
  const auto n_present = std::count_if(present.begin(), present.end(), [](std::size_t c) { return c > 0; });
  if (n_present == 1) {
    const int cls = train.y.front();
    out.single_class = true;
    if (model.binary()) {
      if (normalized) {
        // Unit-norm homogeneous model: point w at the class mean.
        std::vector<double> mean(model.dim, 0.0);
        for (std::size_t i = 0; i < train.size(); ++i) {
          const auto r = train.x.row(i);
          for (std::size_t j = 0; j < model.dim; ++j) mean[j] += (cls == 1 ? 1.0 : -1.0) * r[j];
        }
        std::copy(mean.begin(), mean.end(), model.weights.begin());
        if (std::all_of(mean.begin(), mean.end(), [](double v) { return v == 0.0; })) model.weights[0] = 1.0;
        project_unit(model);
      } else {
        model.bias[0] = cls == 1 ? 1.0 : -1.0;
      }
    } else {
      model.bias[static_cast<std::size_t>(cls)] = 1.0;
    }
    out.train_error = error_rate(model, train);
    return out;
  }

  if (normalized) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double s = train.y[i] == 1 ? 1.0 : -1.0;
      const auto r = train.x.row(i);
      for (std::size_t j = 0; j < model.dim; ++j) model.weights[j] += s * r[j];
    }
    if (std::all_of(model.weights.begin(), model.weights.end(), [](double v) { return v == 0.0; })) {
      model.weights[0] = 1.0;
    }
    project_unit(model);
  }

  const Rng base = Rng(seed).derive("sgd");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(model.parameter_count());
  std::vector<double> z;
  const std::size_t wsize = model.weights.size();

  double lr = cfg.learning_rate;
  double prev = objective(model, cfg, train);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    ++out.epochs_run;
    const LinearModel snapshot = model;
    Rng rng = base.derive("epoch", epoch);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        accumulate_gradient(model, cfg.loss, train.x.row(i), train.y[i], grad, scale, z);
      }
      if (!normalized) {
        for (std::size_t j = 0; j < wsize; ++j) grad[j] += cfg.l2 * model.weights[j];
      }
      for (std::size_t j = 0; j < wsize; ++j) model.weights[j] -= lr * grad[j];
      if (normalized) {
        project_unit(model);
      } else if (cfg.fit_bias) {
        for (std::size_t c = 0; c < model.bias.size(); ++c) model.bias[c] -= lr * grad[wsize + c];
      }
    }
    const double cur = objective(model, cfg, train);
    if (!std::isfinite(cur)) throw TrainingError("objective diverged at epoch " + std::to_string(epoch));
    if (cur > prev) {
      model = snapshot;
      lr *= 0.5;
      if (lr < 1e-12) break;
      continue;
    }
    out.loss_trace.push_back(cur);
    const double gain = prev - cur;
    prev = cur;
    if (gain < cfg.tolerance) break;
  }
  out.train_error = error_rate(model, train);
  return out;
}

void save(const LinearModel& model, std::ostream& dest) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "tbal-linear-model 1\n";
  out << "classes " << model.num_classes << " dim " << model.dim << " normalized " << (model.normalized ? 1 : 0)
      << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < model.rows(); ++r) {
    out << model.bias[r];
    for (const double w : model.row(r)) out << ' ' << w;
    out << '\n';
  }
  dest << out.str();
}

LinearModel load(std::istream& in) {
  in.imbue(std::locale::classic());
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "tbal-linear-model" || version != 1) {
    throw InputError("not a tbal-linear-model v1 record");
  }
  std::string k1, k2, k3;
  int classes = 0;
  std::size_t dim = 0;
  int normalized = 0;
  if (!(in >> k1 >> classes >> k2 >> dim >> k3 >> normalized) || k1 != "classes" || k2 != "dim" ||
      k3 != "normalized" || classes < 2) {
    throw InputError("malformed model header");
  }
  LinearModel m = LinearModel::zeros(classes, dim, normalized != 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!(in >> m.bias[r])) throw InputError("truncated model row " + std::to_string(r));
    for (auto& w : m.row(r)) {
      if (!(in >> w)) throw InputError("truncated model row " + std::to_string(r));
    }
  }
  return m;
}

}  // namespace tbal::model
