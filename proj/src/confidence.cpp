#include "tbal/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tbal::confidence {

const char* to_string(Kind kind) noexcept {
  switch (kind) {
    case Kind::AbsMargin: return "abs_margin";
    case Kind::Softmax: return "softmax";
    case Kind::Platt: return "platt";
    case Kind::Energy: return "energy";
  }
  return "?";
}

Kind kind_from_string(const std::string& name) {
  if (name == "abs_margin") return Kind::AbsMargin;
  if (name == "softmax") return Kind::Softmax;
  if (name == "platt") return Kind::Platt;
  if (name == "energy") return Kind::Energy;
  throw ConfigError("unknown confidence kind '" + name + "' (expected abs_margin, softmax, platt or energy)");
}

double log_sum_exp(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  if (std::isinf(zmax)) return zmax;
  double sum = 0.0;
  for (const double v : z) sum += std::exp(v - zmax);
  return zmax + std::log(sum);
}

std::vector<double> softmax(std::span<const double> z) {
  const double lse = log_sum_exp(z);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

double logit_gap(std::span<const double> z) {
  double top = -std::numeric_limits<double>::infinity();
  double second = top;
  for (const double v : z) {
    if (v > top) {
      second = top;
      top = v;
    } else if (v > second) {
      second = v;
    }
  }
  return top - second;
}

namespace {
double sigmoid(double v) noexcept {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}
}  // namespace

Score score(const Config& cfg, const model::LinearModel& model, std::span<const double> x) {
  const auto z = model::logits(model, x);
  for (const double v : z) {
    if (!std::isfinite(v)) throw NumericError("non-finite logit");
  }
  Score s;
  s.label = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  switch (cfg.kind) {
    case Kind::AbsMargin:
      s.confidence = model.binary() ? std::abs(z[1]) : logit_gap(z);
      break;
    case Kind::Softmax: {
      s.confidence = std::exp(z[static_cast<std::size_t>(s.label)] - log_sum_exp(z));
      break;
    }
    case Kind::Energy: {
      const double t = cfg.temperature;
      std::vector<double> scaled(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) scaled[i] = z[i] / t;
      s.confidence = t * log_sum_exp(scaled);
      break;
    }
    case Kind::Platt: {
      const auto c = static_cast<std::size_t>(s.label);
      const PlattParams p = c < cfg.platt.size() ? cfg.platt[c] : PlattParams{};
      s.confidence = sigmoid(p.a * logit_gap(z) + p.b);
      break;
    }
  }
  if (!std::isfinite(s.confidence)) throw NumericError("non-finite confidence score");
  return s;
}

double shift_nonnegative(std::span<double> scores) {
  if (scores.empty()) return 0.0;
  const double lo = *std::min_element(scores.begin(), scores.end());
  if (lo >= 0.0) return 0.0;
  for (auto& v : scores) v -= lo;
  return -lo;
}

SigmoidFit fit_sigmoid(std::span<const double> margins, std::span<const int> correct) {
  if (margins.size() != correct.size()) throw InputError("margins and outcomes differ in length");
  SigmoidFit out;
  const std::size_t n = margins.size();
  std::size_t positives = 0;
  for (const int c : correct) positives += c != 0;
  if (n == 0 || positives == 0 || positives == n) {
    out.fallback = true;
    return out;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  auto nll = [&](double a, double b) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = a * margins[i] + b;
      // -log sigmoid(u) for correct, -log(1 - sigmoid(u)) otherwise.
      const double v = correct[i] ? -u : u;
      total += v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
    return total * inv_n;
  };

  double a = 1.0;
  double b = 0.0;
  double f = nll(a, b);
  for (std::size_t it = 0; it < 100; ++it) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = margins[i];
      const double p = sigmoid(a * m + b);
      const double r = p - (correct[i] ? 1.0 : 0.0);
      const double w = p * (1.0 - p);
      ga += r * m;
      gb += r;
      haa += w * m * m;
      hab += w * m;
      hbb += w;
    }
    ga *= inv_n;
    gb *= inv_n;
    haa = haa * inv_n + 1e-12;
    hab *= inv_n;
    hbb = hbb * inv_n + 1e-12;
    out.gradient_norm = std::hypot(ga, gb);
    out.iterations = it;
    if (out.gradient_norm <= 1e-8) break;

    const double det = haa * hbb - hab * hab;
    double da, db;
    if (det > 0.0) {
      da = -(hbb * ga - hab * gb) / det;
      db = -(haa * gb - hab * ga) / det;
    } else {
      da = -ga;
      db = -gb;
    }
    double step = 1.0;
    bool moved = false;
    while (step > 1e-10) {
      const double fa = nll(a + step * da, b + step * db);
      if (fa <= f) {
        a += step * da;
        b += step * db;
        f = fa;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    out.iterations = it + 1;
    if (!moved) break;
  }
  out.params = {a, b};
  return out;
}

PlattFit fit_platt(const model::LinearModel& model, const LabeledData& calibration) {
  if (calibration.size() == 0) throw InputError("empty calibration set");
  const auto k = static_cast<std::size_t>(model.num_classes);
  std::vector<std::vector<double>> margins(k);
  std::vector<std::vector<int>> outcomes(k);
  for (std::size_t i = 0; i < calibration.size(); ++i) {
    const auto z = model::logits(model, calibration.x.row(i));
    const auto pred = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    margins[pred].push_back(logit_gap(z));
    outcomes[pred].push_back(static_cast<int>(pred) == calibration.y[i] ? 1 : 0);
  }
  PlattFit out;
  out.params.resize(k);
  out.fallback.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto f = fit_sigmoid(margins[c], outcomes[c]);
    out.params[c] = f.params;
    out.fallback[c] = f.fallback;
  }
  return out;
}

}  // namespace tbal::confidence
