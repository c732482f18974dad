#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ewgn/tensor.hpp"

namespace ewgn {

// One task's labeled samples. MNIST always occupies extended indices
// [0, 10) and Fashion-MNIST [10, 20), regardless of training order, so both
// task orders share a single label space.
struct TaskDataset {
  std::string task_id;            // "mnist" | "fmnist"
  Tensor<float> images;           // [n, 28, 28], scaled to [0,1] by /255
  std::vector<std::uint8_t> labels;  // raw class indices, 0-9
  int label_offset = 0;           // 0 for mnist, 10 for fmnist
  std::string split;              // "train" | "test"

  Eigen::Index count() const { return images.dim(0); }
  int extended_label(Eigen::Index i) const {
    return int(labels[static_cast<std::size_t>(i)]) + label_offset;
  }
};

int label_offset_for(const std::string& task_id);

// raw class index + task offset -> extended index in [0, 20).
int extend_label(int raw, int offset);

// Exactly one-hot over the 20-way extended space.
VecX<float> one_hot20(int extended_index);

// Loads <data_dir>/<task_id>/{train|t10k}-{images-idx3|labels-idx1}-ubyte
// (optionally .gz). `limit` > 0 keeps only the first `limit` samples.
TaskDataset load_task_dataset(const std::string& data_dir, const std::string& task_id,
                              const std::string& split, Eigen::Index limit = 0);

// Deterministic permutation of [0, n) for one epoch, derived from
// (seed, task, epoch) so every epoch reshuffles reproducibly.
std::vector<std::uint32_t> shuffle_epoch(Eigen::Index n, std::uint64_t seed,
                                         const std::string& task_id, int epoch);

// One sample as a [1, 784] row (for dense nets) without copying the dataset.
Tensor<float> sample_row(const TaskDataset& ds, Eigen::Index i);

// One sample as [1, 1, 28, 28] (for conv nets).
Tensor<float> sample_image(const TaskDataset& ds, Eigen::Index i);

// A batch of samples given by indices, flattened to [k, 784] or [k,1,28,28].
Tensor<float> gather_rows(const TaskDataset& ds, const std::uint32_t* idx, Eigen::Index k,
                          bool as_image);

}  // namespace ewgn
