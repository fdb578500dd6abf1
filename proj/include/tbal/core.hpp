#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tbal/error.hpp"
#include "tbal/rng.hpp"

namespace tbal {

// Dense row-major feature storage.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  void append(std::span<const double> values);
  void reserve(std::size_t rows) { data_.reserve(rows * cols_); }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Feature vectors with their ground-truth labels in {0..num_classes-1}.
struct LabeledData {
  FeatureMatrix x;
  std::vector<int> y;
  int num_classes = 2;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return x.cols(); }

  LabeledData subset(std::span<const std::size_t> indices) const;
  void validate() const;  // throws InputError on shape/label inconsistencies
};

enum class Provenance : std::uint8_t { Unlabeled, Human, Auto };

const char* to_string(Provenance p) noexcept;

// Lifecycle of one pool point. Transitions only leave Unlabeled.
struct PointState {
  Provenance provenance = Provenance::Unlabeled;
  int label = -1;
  int round = -1;
};

struct PartitionCounts {
  std::size_t n_auto = 0;
  std::size_t n_human = 0;
  std::size_t n_unlabeled = 0;

  std::size_t total() const noexcept { return n_auto + n_human + n_unlabeled; }
  bool operator==(const PartitionCounts&) const = default;
};

class Oracle;

// The unlabeled pool. Features are shared and immutable; only the per-point
// states belong to a copy, so copying a Pool is cheap and each run owns its own.
// Ground truth is reachable only through Oracle.
class Pool {
 public:
  explicit Pool(LabeledData data);
  Pool(std::shared_ptr<const LabeledData> data);

  std::size_t size() const noexcept { return states_.size(); }
  std::size_t dim() const noexcept { return data_->dim(); }
  int num_classes() const noexcept { return data_->num_classes; }

  std::span<const double> features(std::size_t id) const { return data_->x.row(id); }
  const FeatureMatrix& feature_matrix() const noexcept { return data_->x; }

  const PointState& state(std::size_t id) const { return states_.at(id); }
  std::span<const PointState> states() const noexcept { return states_; }
  bool is_unlabeled(std::size_t id) const { return state(id).provenance == Provenance::Unlabeled; }

  // Unlabeled ids in ascending order.
  std::vector<std::size_t> unlabeled_ids() const;

  void mark_auto(std::size_t id, int label, int round);

  PartitionCounts counts() const noexcept { return counts_; }
  // True when both Pools view the same underlying points.
  bool same_points(const Pool& other) const noexcept { return data_ == other.data_; }

 private:
  friend class Oracle;
  void transition(std::size_t id, PointState next);

  std::shared_ptr<const LabeledData> data_;
  std::vector<PointState> states_;
  PartitionCounts counts_;
};

PartitionCounts partition_counts(const Pool& pool);

// Simulated human annotator over a Pool.
class Oracle {
 public:
  explicit Oracle(Pool& pool) : pool_(&pool) {}

  // Reveals the label of an unlabeled point and records it as human labeled.
  int query(std::size_t id, int round);
  std::size_t queries() const noexcept { return queries_; }

  // Ground-truth lookup for evaluation only; does not label anything.
  static int audit(const Pool& pool, std::size_t id) { return pool.data_->y.at(id); }

 private:
  Pool* pool_;
  std::size_t queries_ = 0;
};

// Human-labeled validation data with a mask of still-active entries.
// Entries are only ever deactivated.
class ValidationSet {
 public:
  ValidationSet() : data_(std::make_shared<LabeledData>()) {}
  explicit ValidationSet(LabeledData data);

  std::size_t size() const noexcept { return active_.size(); }
  std::size_t active_count() const noexcept { return n_active_; }
  bool active(std::size_t i) const { return active_.at(i) != 0; }
  std::vector<std::size_t> active_indices() const;

  std::span<const double> features(std::size_t i) const { return data_->x.row(i); }
  int label(std::size_t i) const { return data_->y.at(i); }
  const LabeledData& data() const noexcept { return *data_; }

  void deactivate(std::size_t i);

 private:
  std::shared_ptr<const LabeledData> data_;
  std::vector<std::uint8_t> active_;
  std::size_t n_active_ = 0;
};

}  // namespace tbal
