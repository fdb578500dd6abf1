#include "tbal/data.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <vector>

namespace tbal::data {

const char* to_string(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::UnitBall: return "unit_ball";
    case DatasetKind::Xor: return "xor";
    case DatasetKind::MnistLinear: return "mnist";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "unit_ball") return DatasetKind::UnitBall;
  if (name == "xor") return DatasetKind::Xor;
  if (name == "mnist") return DatasetKind::MnistLinear;
  throw ConfigError("unknown dataset kind '" + name + "' (expected unit_ball, xor or mnist)");
}

void DatasetSpec::validate() const {
  if (kind == DatasetKind::UnitBall && dim < 2) throw ConfigError("unit_ball requires dim >= 2");
  if (kind == DatasetKind::Xor && !(xor_radius > 0.0 && xor_radius <= 2.0)) {
    throw ConfigError("xor radius must lie in (0, 2]");
  }
  if (kind != DatasetKind::MnistLinear && n_total < 1) throw ConfigError("n_total must be positive");
  if (pool_size + val_size > n_total) {
    throw ConfigError("pool_size + val_size (" + std::to_string(pool_size + val_size) + ") exceeds n_total (" +
                      std::to_string(n_total) + ")");
  }
}

int unit_ball_label(std::span<const double> x) {
  double s = 0.0;
  for (const double v : x) s += v;
  return s > 0.0 ? 1 : 0;
}

int xor_label_of_center(double cx, double cy) { return (cx > 0) == (cy > 0) ? 1 : 0; }

LabeledData gen_unit_ball(std::size_t d, std::size_t n, RngSeed seed) {
  if (d < 2) throw ConfigError("unit ball dimension must be >= 2");
  if (n < 1) throw ConfigError("unit ball sample count must be >= 1");
  Rng rng = Rng(seed).derive("unit_ball");
  LabeledData out;
  out.num_classes = 2;
  out.x = FeatureMatrix(0, d);
  out.x.reserve(n);
  out.y.reserve(n);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (auto& c : v) {
        c = rng.normal();
        norm2 += c * c;
      }
    } while (norm2 == 0.0);
    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double scale = radius / std::sqrt(norm2);
    for (auto& c : v) c *= scale;
    // Guard the unit-norm invariant against rounding.
    double check = 0.0;
    for (const double c : v) check += c * c;
    if (check > 1.0) {
      const double fix = 1.0 / std::sqrt(check);
      for (auto& c : v) c *= fix;
    }
    out.x.append(v);
    out.y.push_back(unit_ball_label(v));
  }
  return out;
}

LabeledData gen_xor(std::size_t n, double radius, RngSeed seed) {
  if (n < 4) throw ConfigError("xor requires n >= 4");
  if (!(radius > 0.0) || radius > 2.0) throw ConfigError("xor radius must lie in (0, 2]");
  static constexpr std::array<std::array<double, 2>, 4> kCenters{{{2, 2}, {-2, -2}, {2, -2}, {-2, 2}}};
  Rng rng = Rng(seed).derive("xor");
  LabeledData out;
  out.num_classes = 2;
  out.x = FeatureMatrix(0, 2);
  out.x.reserve(n);
  out.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = kCenters[rng.below(4)];
    const double r = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const std::array<double, 2> p{c[0] + r * std::cos(theta), c[1] + r * std::sin(theta)};
    out.x.append(p);
    out.y.push_back(xor_label_of_center(c[0], c[1]));
  }
  return out;
}

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset, const std::string& what) {
  if (offset + 4 > buf.size()) throw FormatError(what + ": truncated header", offset);
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

}  // namespace

LabeledData load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_all(images);
  const auto lab = read_all(labels);
  const std::string iname = images.string();
  const std::string lname = labels.string();

  if (const auto magic = read_be32(img, 0, iname); magic != 0x00000803U) {
    throw FormatError(iname + ": bad image magic " + std::to_string(magic), 0);
  }
  if (const auto magic = read_be32(lab, 0, lname); magic != 0x00000801U) {
    throw FormatError(lname + ": bad label magic " + std::to_string(magic), 0);
  }
  const std::size_t n_img = read_be32(img, 4, iname);
  const std::size_t rows = read_be32(img, 8, iname);
  const std::size_t cols = read_be32(img, 12, iname);
  const std::size_t n_lab = read_be32(lab, 4, lname);
  if (n_img != n_lab) {
    throw FormatError("image count " + std::to_string(n_img) + " does not match label count " +
                          std::to_string(n_lab),
                      4);
  }
  const std::size_t dim = rows * cols;
  const std::size_t img_need = 16 + n_img * dim;
  if (img.size() < img_need) throw FormatError(iname + ": truncated pixel data", img.size());
  if (lab.size() < 8 + n_lab) throw FormatError(lname + ": truncated label data", lab.size());

  LabeledData out;
  out.num_classes = 10;
  out.x = FeatureMatrix(n_img, dim);
  out.y.resize(n_img);
  for (std::size_t i = 0; i < n_img; ++i) {
    auto row = out.x.row(i);
    const unsigned char* px = img.data() + 16 + i * dim;
    for (std::size_t j = 0; j < dim; ++j) row[j] = static_cast<double>(px[j]) / 255.0;
    const int label = lab[8 + i];
    if (label > 9) throw FormatError(lname + ": label " + std::to_string(label) + " out of range", 8 + i);
    out.y[i] = label;
  }
  return out;
}

std::pair<std::filesystem::path, std::filesystem::path> default_mnist_paths() {
  std::filesystem::path dir = "data";
  if (const char* env = std::getenv("TBAL_DATA_DIR"); env && *env) dir = env;
  return {dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"};
}

LabeledData make_dataset(const DatasetSpec& spec, RngSeed seed) {
  spec.validate();
  switch (spec.kind) {
    case DatasetKind::UnitBall: return gen_unit_ball(spec.dim, spec.n_total, seed);
    case DatasetKind::Xor: return gen_xor(spec.n_total, spec.xor_radius, seed);
    case DatasetKind::MnistLinear: {
      auto [img, lab] = default_mnist_paths();
      if (!spec.mnist_images.empty()) img = spec.mnist_images;
      if (!spec.mnist_labels.empty()) lab = spec.mnist_labels;
      return load_mnist_idx(img, lab);
    }
  }
  throw ConfigError("unhandled dataset kind");
}

std::pair<Pool, ValidationSet> split_pool_val(const LabeledData& points, std::size_t pool_size,
                                              std::size_t val_size, RngSeed seed) {
  if (pool_size + val_size > points.size()) {
    throw ConfigError("split sizes " + std::to_string(pool_size) + " + " + std::to_string(val_size) +
                      " exceed " + std::to_string(points.size()) + " points");
  }
  Rng rng = Rng(seed).derive("split");
  const auto order = rng.sample_indices(points.size(), pool_size + val_size);
  const std::span<const std::size_t> all(order);
  return {Pool(points.subset(all.first(pool_size))), ValidationSet(points.subset(all.subspan(pool_size)))};
}

}  // namespace tbal::data
