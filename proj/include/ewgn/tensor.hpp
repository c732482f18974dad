#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ewgn/errors.hpp"

namespace ewgn {

template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MatRef = Eigen::Ref<const MatRM<S>>;
template <class S>
using VecRef = Eigen::Ref<const VecX<S>>;
template <class S>
using MutMatRef = Eigen::Ref<MatRM<S>>;
template <class S>
using MutVecRef = Eigen::Ref<VecX<S>>;

using Shape = std::vector<Eigen::Index>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

inline Eigen::Index shape_numel(const Shape& s) {
  Eigen::Index n = 1;
  for (auto d : s) n *= d;
  return n;
}

// Dense n-dimensional array over a flat row-major buffer. Rank-2 views map
// straight onto Eigen matrices; higher ranks are indexed explicitly.
template <class S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(VecX<S>::Zero(shape_numel(shape_))) {
    check_shape();
  }

  Tensor(Shape shape, VecX<S> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_numel(shape_))
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_str(shape_));
  }

  Tensor(Shape shape, std::initializer_list<S> vals)
      : shape_(std::move(shape)), data_(static_cast<Eigen::Index>(vals.size())) {
    Eigen::Index i = 0;
    for (S v : vals) data_[i++] = v;
    if (data_.size() != shape_numel(shape_))
      throw DimensionError("tensor literal length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_str(shape_));
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor full(Shape shape, S value) {
    Tensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  Eigen::Index dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  Eigen::Index size() const { return data_.size(); }

  VecX<S>& flat() { return data_; }
  const VecX<S>& flat() const { return data_; }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }

  // Rank-2 view.
  Eigen::Map<MatRM<S>> mat() {
    require_rank(2);
    return {data_.data(), shape_[0], shape_[1]};
  }
  Eigen::Map<const MatRM<S>> mat() const {
    require_rank(2);
    return {data_.data(), shape_[0], shape_[1]};
  }

  // Collapses [d0, d1, ..., dk] into a (d0, d1*...*dk) matrix view.
  Eigen::Map<MatRM<S>> rows_view() {
    return {data_.data(), shape_.empty() ? 1 : shape_[0],
            shape_.empty() ? data_.size() : data_.size() / shape_[0]};
  }
  Eigen::Map<const MatRM<S>> rows_view() const {
    return {data_.data(), shape_.empty() ? 1 : shape_[0],
            shape_.empty() ? data_.size() : data_.size() / shape_[0]};
  }

  // Same buffer under a new shape; sizes must agree.
  Tensor reshaped(Shape shape) const {
    if (shape_numel(shape) != data_.size())
      throw DimensionError("cannot reshape " + shape_str(shape_) + " tensor to " +
                           shape_str(shape));
    return Tensor(std::move(shape), data_);
  }

  bool all_finite() const { return data_.allFinite(); }

  template <class Scalar2>
  Tensor<Scalar2> cast() const {
    return Tensor<Scalar2>(shape_, data_.template cast<Scalar2>());
  }

 private:
  void check_shape() const {
    for (auto d : shape_)
      if (d <= 0) throw DimensionError("non-positive dimension in shape " + shape_str(shape_));
  }
  void require_rank(int r) const {
    if (rank() != r)
      throw DimensionError("expected rank-" + std::to_string(r) + " tensor, got " +
                           shape_str(shape_));
  }

  Shape shape_;
  VecX<S> data_;
};

}  // namespace ewgn
