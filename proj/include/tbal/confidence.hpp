#pragma once

#include <span>
#include <string>
#include <vector>

#include "tbal/model.hpp"

namespace tbal::confidence {

enum class Kind { AbsMargin, Softmax, Platt, Energy };

const char* to_string(Kind kind) noexcept;
Kind kind_from_string(const std::string& name);

struct PlattParams {
  double a = 1.0;
  double b = 0.0;
};

struct Config {
  Kind kind = Kind::AbsMargin;
  double temperature = 1.0;          // Energy
  std::vector<PlattParams> platt;    // Platt, one entry per class
};

struct Score {
  int label = 0;
  double confidence = 0.0;
};

// Larger confidence means more confident for every kind.
//   AbsMargin: |m| for binary models, top-1 minus top-2 logit otherwise
//   Softmax:   max_c softmax(z)_c
//   Energy:    T * log sum_c exp(z_c / T), the negated energy; may be negative,
//              see shift_nonnegative
//   Platt:     sigmoid(a * gap + b) with the predicted class's (a, b)
Score score(const Config& cfg, const model::LinearModel& model, std::span<const double> x);

// Top-1 minus top-2 logit.
double logit_gap(std::span<const double> z);

double log_sum_exp(std::span<const double> z);
std::vector<double> softmax(std::span<const double> z);

// Subtracts min(scores) from every score when that minimum is negative, so a
// round's scores land in [0, inf). Returns the offset that was added.
double shift_nonnegative(std::span<double> scores);

struct SigmoidFit {
  PlattParams params;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool fallback = false;  // single-outcome data: identity calibration returned
};

// Maximum-likelihood fit of P(correct | margin) = sigmoid(a * margin + b) by
// damped Newton iterations (at most 100, until mean gradient norm <= 1e-8).
SigmoidFit fit_sigmoid(std::span<const double> margins, std::span<const int> correct);

struct PlattFit {
  std::vector<PlattParams> params;  // per class
  std::vector<bool> fallback;       // per class
};

// Per predicted class, fits correctness of the model against the logit gap.
PlattFit fit_platt(const model::LinearModel& model, const LabeledData& calibration);

}  // namespace tbal::confidence
