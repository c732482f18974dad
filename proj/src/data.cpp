#include "ewgn/data.hpp"

#include <filesystem>

#include "ewgn/errors.hpp"
#include "ewgn/idx.hpp"
#include "ewgn/network.hpp"
#include "ewgn/rng.hpp"

namespace ewgn {

namespace fs = std::filesystem;

int label_offset_for(const std::string& task_id) {
  if (task_id == "mnist") return 0;
  if (task_id == "fmnist") return 10;
  throw ConfigError("unknown task id: " + task_id + " (expected mnist|fmnist)");
}

int extend_label(int raw, int offset) {
  if (raw < 0 || raw >= 10)
    throw DataError("extend_label: raw class " + std::to_string(raw) + " out of [0,10)");
  if (offset != 0 && offset != 10)
    throw DataError("extend_label: offset must be 0 or 10, got " + std::to_string(offset));
  return raw + offset;
}

VecX<float> one_hot20(int extended_index) {
  if (extended_index < 0 || extended_index >= kNumClasses)
    throw DataError("one_hot20: index " + std::to_string(extended_index) + " out of [0,20)");
  VecX<float> v = VecX<float>::Zero(kNumClasses);
  v[extended_index] = 1.0f;
  return v;
}

namespace {

std::string resolve_idx_path(const std::string& data_dir, const std::string& task_id,
                             const std::string& stem) {
  const fs::path base = fs::path(data_dir) / task_id;
  for (const char* suffix : {"", ".gz"}) {
    fs::path p = base / (stem + suffix);
    if (fs::exists(p)) return p.string();
  }
  throw DataError("dataset file not found: " + (base / stem).string() + "[.gz]");
}

}  // namespace

TaskDataset load_task_dataset(const std::string& data_dir, const std::string& task_id,
                              const std::string& split, Eigen::Index limit) {
  if (split != "train" && split != "test")
    throw ConfigError("unknown split: " + split + " (expected train|test)");
  const std::string prefix = split == "train" ? "train" : "t10k";
  const std::string img_path =
      resolve_idx_path(data_dir, task_id, prefix + "-images-idx3-ubyte");
  const std::string lbl_path =
      resolve_idx_path(data_dir, task_id, prefix + "-labels-idx1-ubyte");

  IdxImages im = parse_idx_images(read_file_maybe_gzip(img_path));
  std::vector<std::uint8_t> labels = parse_idx_labels(read_file_maybe_gzip(lbl_path));
  if (labels.size() != im.count)
    throw DataError("dataset " + task_id + "/" + split + ": " + std::to_string(im.count) +
                    " images vs " + std::to_string(labels.size()) + " labels");
  if (im.rows != 28 || im.cols != 28)
    throw DataError("dataset " + task_id + "/" + split + ": expected 28x28 images, got " +
                    std::to_string(im.rows) + "x" + std::to_string(im.cols));

  Eigen::Index n = static_cast<Eigen::Index>(im.count);
  if (limit > 0 && limit < n) n = limit;

  TaskDataset ds;
  ds.task_id = task_id;
  ds.label_offset = label_offset_for(task_id);
  ds.split = split;
  ds.labels.assign(labels.begin(), labels.begin() + n);
  ds.images = Tensor<float>({n, kImageSide, kImageSide});
  float* out = ds.images.data();
  const std::uint8_t* px = im.pixels.data();
  for (Eigen::Index i = 0; i < n * kImagePixels; ++i) out[i] = float(px[i]) / 255.0f;
  return ds;
}

std::vector<std::uint32_t> shuffle_epoch(Eigen::Index n, std::uint64_t seed,
                                         const std::string& task_id, int epoch) {
  SplitMix64 rng(mix_seed(mix_seed(seed, fnv1a64("shuffle:" + task_id)),
                          static_cast<std::uint64_t>(epoch)));
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = std::uint32_t(i);
  shuffle(perm, rng);
  return perm;
}

Tensor<float> sample_row(const TaskDataset& ds, Eigen::Index i) {
  return Tensor<float>({1, kImagePixels},
                       VecX<float>(ds.images.flat().segment(i * kImagePixels, kImagePixels)));
}

Tensor<float> sample_image(const TaskDataset& ds, Eigen::Index i) {
  return Tensor<float>({1, 1, kImageSide, kImageSide},
                       VecX<float>(ds.images.flat().segment(i * kImagePixels, kImagePixels)));
}

Tensor<float> gather_rows(const TaskDataset& ds, const std::uint32_t* idx, Eigen::Index k,
                          bool as_image) {
  Shape shape = as_image ? Shape{k, 1, kImageSide, kImageSide} : Shape{k, kImagePixels};
  Tensor<float> out(shape);
  for (Eigen::Index r = 0; r < k; ++r)
    out.flat().segment(r * kImagePixels, kImagePixels) =
        ds.images.flat().segment(Eigen::Index(idx[r]) * kImagePixels, kImagePixels);
  return out;
}

}  // namespace ewgn
