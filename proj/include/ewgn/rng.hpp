#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace ewgn {

// SplitMix64 (Steele, Lea, Flood 2014) with the standard published constants.
// Every random decision in a run (weight init, epoch shuffles, subsampling)
// derives from one of these streams, so runs replay bit-identically on any
// platform. The algorithm name is recorded in run manifests as "splitmix64".
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) using the top 53 bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). Lemire multiply-shift; n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Stable stream derivation: feeds the tag through the SplitMix64 output
// function so per-task / per-epoch streams never overlap.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  SplitMix64 g(seed ^ (tag * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
  return g.next_u64();
}

// FNV-1a over a string, used to fold string tags (task ids) into seeds
// and to hash canonical configs.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x00000100000001B3ULL;
  }
  return h;
}

// In-place Fisher-Yates with a caller-owned stream.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

// First k entries of a random permutation of [0, n): a deterministic
// subsample without replacement.
inline std::vector<std::uint32_t> sample_indices(std::uint32_t n, std::uint32_t k,
                                                 SplitMix64& rng) {
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(idx, rng);
  if (k < n) idx.resize(k);
  return idx;
}

inline constexpr const char* kPrngName = "splitmix64";

}  // namespace ewgn
