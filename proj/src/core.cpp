#include "tbal/core.hpp"

#include <string>

namespace tbal {

void FeatureMatrix::append(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw InputError("feature row has dimension " + std::to_string(values.size()) + ", expected " +
                     std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

LabeledData LabeledData::subset(std::span<const std::size_t> indices) const {
  LabeledData out;
  out.num_classes = num_classes;
  out.x = FeatureMatrix(0, dim());
  out.x.reserve(indices.size());
  out.y.reserve(indices.size());
  for (const auto i : indices) {
    out.x.append(x.row(i));
    out.y.push_back(y.at(i));
  }
  return out;
}

void LabeledData::validate() const {
  if (x.rows() != y.size()) {
    throw InputError("feature rows (" + std::to_string(x.rows()) + ") and labels (" +
                     std::to_string(y.size()) + ") disagree");
  }
  if (num_classes < 2) throw InputError("num_classes must be at least 2");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= num_classes) {
      throw InputError("label " + std::to_string(y[i]) + " at index " + std::to_string(i) + " out of range");
    }
  }
}

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Unlabeled: return "unlabeled";
    case Provenance::Human: return "human";
    case Provenance::Auto: return "auto";
  }
  return "?";
}

Pool::Pool(LabeledData data) : Pool(std::make_shared<const LabeledData>(std::move(data))) {}

Pool::Pool(std::shared_ptr<const LabeledData> data) : data_(std::move(data)) {
  data_->validate();
  states_.assign(data_->size(), PointState{});
  counts_.n_unlabeled = states_.size();
}

std::vector<std::size_t> Pool::unlabeled_ids() const {
  std::vector<std::size_t> ids;
  ids.reserve(counts_.n_unlabeled);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].provenance == Provenance::Unlabeled) ids.push_back(i);
  }
  return ids;
}

void Pool::transition(std::size_t id, PointState next) {
  auto& cur = states_.at(id);
  if (cur.provenance != Provenance::Unlabeled) {
    throw IntegrityError("point " + std::to_string(id) + " is already " + to_string(cur.provenance));
  }
  if (next.label < 0 || next.label >= num_classes()) {
    throw IntegrityError("label " + std::to_string(next.label) + " out of range for point " + std::to_string(id));
  }
  cur = next;
  --counts_.n_unlabeled;
  if (next.provenance == Provenance::Auto) {
    ++counts_.n_auto;
  } else {
    ++counts_.n_human;
  }
}

void Pool::mark_auto(std::size_t id, int label, int round) {
  transition(id, PointState{Provenance::Auto, label, round});
}

PartitionCounts partition_counts(const Pool& pool) {
  PartitionCounts c;
  for (const auto& s : pool.states()) {
    switch (s.provenance) {
      case Provenance::Unlabeled: ++c.n_unlabeled; break;
      case Provenance::Human: ++c.n_human; break;
      case Provenance::Auto: ++c.n_auto; break;
    }
  }
  return c;
}

int Oracle::query(std::size_t id, int round) {
  const int label = pool_->data_->y.at(id);
  pool_->transition(id, PointState{Provenance::Human, label, round});
  ++queries_;
  return label;
}

ValidationSet::ValidationSet(LabeledData data)
    : data_(std::make_shared<const LabeledData>(std::move(data))) {
  if (data_->size() > 0) data_->validate();
  active_.assign(data_->size(), 1);
  n_active_ = active_.size();
}

std::vector<std::size_t> ValidationSet::active_indices() const {
  std::vector<std::size_t> out;
  out.reserve(n_active_);
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i]) out.push_back(i);
  }
  return out;
}

void ValidationSet::deactivate(std::size_t i) {
  auto& a = active_.at(i);
  if (a) {
    a = 0;
    --n_active_;
  }
}

}  // namespace tbal
