#pragma once

#include <cmath>
#include <vector>

#include "tbal/model.hpp"
#include "tbal/rng.hpp"

namespace gradcheck {

struct Result {
  int points = 0;
  double worst = 0.0;  // largest relative error seen
};

inline double& param(tbal::model::LinearModel& m, std::size_t i) {
  return i < m.weights.size() ? m.weights[i] : m.bias[i - m.weights.size()];
}

// Central differences of example_loss against example_gradient at `count`
// random (w, b, x, y) draws. Hinge draws within 1e-3 of the kink are redrawn.
inline Result run(tbal::model::Loss loss, int num_classes, std::size_t dim, int count, std::uint64_t seed) {
  using namespace tbal;
  Rng rng(RngSeed{seed});
  Result res;
  const double h = 1e-6;
  while (res.points < count) {
    auto m = model::LinearModel::zeros(num_classes, dim);
    for (auto& w : m.weights) w = rng.normal();
    for (auto& b : m.bias) b = rng.normal() * 0.5;
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.normal();
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes)));
    if (loss == model::Loss::Hinge) {
      const auto z = model::logits(m, x);
      double rival = -INFINITY;
      for (int c = 0; c < num_classes; ++c)
        if (c != y) rival = std::max(rival, z[static_cast<std::size_t>(c)]);
      const double slack = z[static_cast<std::size_t>(y)] - rival;  // binary: 2 s m
      const double kink = num_classes == 2 ? slack / 2.0 : slack;
      if (std::abs(kink - 1.0) < 1e-3) continue;
      // a tie between rivals is also a kink for the multiclass hinge
      int at_max = 0;
      for (int c = 0; c < num_classes; ++c)
        if (c != y && std::abs(z[static_cast<std::size_t>(c)] - rival) < 1e-3) ++at_max;
      if (num_classes > 2 && at_max > 1) continue;
    }
    const auto g = model::example_gradient(m, loss, x, y);
    double num2 = 0, diff2 = 0, ana2 = 0;
    for (std::size_t i = 0; i < m.parameter_count(); ++i) {
      auto mp = m, mm = m;
      param(mp, i) += h;
      param(mm, i) -= h;
      const double fd = (model::example_loss(mp, loss, x, y) - model::example_loss(mm, loss, x, y)) / (2 * h);
      num2 += fd * fd;
      ana2 += g[i] * g[i];
      diff2 += (fd - g[i]) * (fd - g[i]);
    }
    const double scale = std::max({std::sqrt(num2), std::sqrt(ana2), 1e-12});
    res.worst = std::max(res.worst, std::sqrt(diff2) / scale);
    ++res.points;
  }
  return res;
}

}  // namespace gradcheck
