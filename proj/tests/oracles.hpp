#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

inline constexpr long double kPi = 3.141592653589793238462643383279502884L;
inline constexpr long double kE = 2.718281828459045235360287471352662498L;

inline double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Exhaustive threshold scan: test every distinct unlabeled score, recounting
// support and errors from scratch each time.
struct ValPoint {
  double score;
  bool correct;
};

inline double brute_threshold(const std::vector<double>& unlabeled, const std::vector<ValPoint>& val, double eps,
                              std::size_t n0, int sigma_kind /*0 stderr, 1 hoeffding, 2 zero*/, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (const double t : unlabeled) {
    std::size_t n = 0, wrong = 0;
    for (const auto& v : val) {
      if (v.score >= t) {
        ++n;
        wrong += v.correct ? 0 : 1;
      }
    }
    if (n < n0 || n == 0) continue;
    const double e = static_cast<double>(wrong) / static_cast<double>(n);
    double s = 0.0;
    if (sigma_kind == 0) s = std::sqrt(e * (1.0 - e) / static_cast<double>(n));
    if (sigma_kind == 1) s = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
    if (e + s <= eps && t < best) best = t;
  }
  return best;
}

// log-sum-exp with Kahan-compensated summation in long double.
inline long double lse_compensated(const std::vector<double>& z) {
  long double m = -std::numeric_limits<long double>::infinity();
  for (const double v : z) m = std::max<long double>(m, v);
  long double sum = 0.0L, c = 0.0L;
  for (const double v : z) {
    const long double y = std::exp(static_cast<long double>(v) - m) - c;
    const long double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return m + std::log(sum);
}

// Theory formulas, long double, written from the closed forms.
inline long double rademacher(long double n, long double d) { return std::sqrt(2.0L * d / n * std::log(kE * n / d)); }

struct Round {
  std::size_t nv, na;
  double err;
};

inline long double error_bound(double d, std::size_t k, double delta, double p0, const std::vector<Round>& rounds) {
  std::size_t na_total = 0;
  for (const auto& r : rounds) na_total += r.na;
  const long double L = std::log(8.0L * k / delta);
  const long double NA = na_total;
  long double sum = 0.0L;
  for (const auto& r : rounds) {
    if (r.na == 0) continue;
    const long double nv = r.nv;
    const long double dev = 4.0L / p0 * std::sqrt(2.0L / nv * (2.0L * d * std::log(kE * nv / d) + L));
    sum += (r.na / NA) * (r.err + dev);
  }
  sum += 4.0L / p0 * std::sqrt(2.0L * k / NA * (2.0L * d * std::log(kE * NA / d) + L));
  return sum;
}

inline long double coverage_bound(double t, double d, std::size_t k, double n, double delta) {
  const long double N = n;
  return 1.0L - t * std::sqrt(4.0L * d / kPi) -
         2.0L * k * std::sqrt(2.0L / N * (2.0L * d * std::log(kE * N / d) + std::log(8.0L * k / delta)));
}

inline long double band_bound(double g1, double g2, double d) {
  return g1 * std::sqrt(static_cast<long double>(d)) / (2.0L * std::sqrt(kPi)) *
         std::exp(-(d - 2.0L) * g2 * static_cast<long double>(g2) / 2.0L);
}

inline long double min_val_real(double sigma, double eps, double c2) {
  return 12.0L * sigma * sigma * std::log(4.0L * c2) / (static_cast<long double>(eps) * eps);
}

// Minimal IDX reader: returns pixel bytes of image i and its label.
struct IdxImage {
  std::vector<unsigned char> pixels;
  int label = -1;
};

inline IdxImage read_idx_image(const std::string& images, const std::string& labels, std::size_t i) {
  auto be = [](std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | b[3];
  };
  IdxImage out;
  std::ifstream fi(images, std::ios::binary), fl(labels, std::ios::binary);
  be(fi);
  be(fi);
  const auto rows = be(fi), cols = be(fi);
  fi.seekg(16 + static_cast<std::streamoff>(i * rows * cols));
  out.pixels.resize(rows * cols);
  fi.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()));
  fl.seekg(8 + static_cast<std::streamoff>(i));
  out.label = fl.get();
  return out;
}

// Average ranks (ties share the mean rank), then Pearson on ranks.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
