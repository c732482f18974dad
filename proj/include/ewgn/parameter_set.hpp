#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ewgn/errors.hpp"
#include "ewgn/tensor.hpp"

namespace ewgn {

// Ordered, named collection of parameter tensors backed by one contiguous
// buffer. Entry order is the canonical flattening order (layer order,
// weights before biases), so the buffer itself *is* the flattened vector:
// optimizers, EWC penalties and checkpoints all operate on flat() directly
// while layers see per-entry matrix views.
template <class S>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Shape shape;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
  };

  ParameterSet() = default;

  // Registers an entry and grows the buffer. Intended for build time, not
  // per-step use.
  Eigen::Index add(std::string name, Shape shape) {
    for (const auto& e : entries_)
      if (e.name == name) throw ConfigError("duplicate parameter name: " + name);
    Entry e;
    e.name = std::move(name);
    e.size = shape_numel(shape);
    e.shape = std::move(shape);
    e.offset = data_.size();
    data_.conservativeResize(e.offset + e.size);
    data_.segment(e.offset, e.size).setZero();
    entries_.push_back(std::move(e));
    return static_cast<Eigen::Index>(entries_.size()) - 1;
  }

  std::size_t count() const { return entries_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  Eigen::Index total() const { return data_.size(); }

  VecX<S>& flat() { return data_; }
  const VecX<S>& flat() const { return data_; }

  Eigen::Map<VecX<S>> vec(std::size_t i) {
    const Entry& e = entries_[i];
    return {data_.data() + e.offset, e.size};
  }
  Eigen::Map<const VecX<S>> vec(std::size_t i) const {
    const Entry& e = entries_[i];
    return {data_.data() + e.offset, e.size};
  }

  // Rank-2 entries viewed as row-major matrices.
  Eigen::Map<MatRM<S>> mat(std::size_t i) {
    const Entry& e = entries_[i];
    if (e.shape.size() != 2)
      throw DimensionError("parameter " + e.name + " is not rank-2: " + shape_str(e.shape));
    return {data_.data() + e.offset, e.shape[0], e.shape[1]};
  }
  Eigen::Map<const MatRM<S>> mat(std::size_t i) const {
    const Entry& e = entries_[i];
    if (e.shape.size() != 2)
      throw DimensionError("parameter " + e.name + " is not rank-2: " + shape_str(e.shape));
    return {data_.data() + e.offset, e.shape[0], e.shape[1]};
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return i;
    throw ConfigError("no parameter named " + name);
  }

  // Replaces the whole flattened vector; length must match.
  void assign_flat(VecRef<S> v) {
    if (v.size() != data_.size())
      throw DimensionError("flat vector length " + std::to_string(v.size()) +
                           " does not match parameter count " + std::to_string(data_.size()));
    data_ = v;
  }

  // A zero-valued set with the same entry layout, e.g. for gradients.
  ParameterSet zeros_like() const {
    ParameterSet z;
    z.entries_ = entries_;
    z.data_ = VecX<S>::Zero(data_.size());
    return z;
  }

  template <class Scalar2>
  ParameterSet<Scalar2> cast() const {
    ParameterSet<Scalar2> out;
    for (const auto& e : entries_) out.add(e.name, e.shape);
    out.flat() = data_.template cast<Scalar2>();
    return out;
  }

 private:
  template <class>
  friend class ParameterSet;

  std::vector<Entry> entries_;
  VecX<S> data_;
};

}  // namespace ewgn
