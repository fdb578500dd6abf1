#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>

#include "tbal/core.hpp"

namespace tbal::data {

enum class DatasetKind { UnitBall, Xor, MnistLinear };

const char* to_string(DatasetKind kind) noexcept;
DatasetKind dataset_kind_from_string(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::UnitBall;
  std::size_t dim = 30;
  std::size_t n_total = 20000;
  std::size_t pool_size = 16000;
  std::size_t val_size = 4000;
  double xor_radius = 1.0;
  // MnistLinear only. Empty paths resolve against TBAL_DATA_DIR.
  std::filesystem::path mnist_images;
  std::filesystem::path mnist_labels;

  void validate() const;
};

// Uniform on the d-dimensional unit ball, labeled by the homogeneous separator
// w* = (1/sqrt(d), ..., 1/sqrt(d)): label 1 iff <w*, x> > 0.
LabeledData gen_unit_ball(std::size_t d, std::size_t n, RngSeed seed);

// Four disks of the given radius centered at (+-2, +-2). Centers (2,2) and
// (-2,-2) carry label 1, the other diagonal label 0.
LabeledData gen_xor(std::size_t n, double radius, RngSeed seed);

int unit_ball_label(std::span<const double> x);
int xor_label_of_center(double cx, double cy);

// IDX pair (images magic 0x00000803, labels magic 0x00000801), big-endian.
// Pixels are scaled to [0, 1].
LabeledData load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

// Default MNIST training file locations under TBAL_DATA_DIR (or ./data).
std::pair<std::filesystem::path, std::filesystem::path> default_mnist_paths();

LabeledData make_dataset(const DatasetSpec& spec, RngSeed seed);

// Uniform random disjoint split. The pool hides labels behind the Oracle.
std::pair<Pool, ValidationSet> split_pool_val(const LabeledData& points, std::size_t pool_size,
                                              std::size_t val_size, RngSeed seed);

}  // namespace tbal::data
