#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ewgn {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count*rows*cols, row-major, values preserved exactly
};

// Big-endian IDX containers. Parsers are byte-exact: serialize(parse(b)) == b.
IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);

// Reads a file, transparently inflating gzip content (by magic sniff, not
// extension).
std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path);

}  // namespace ewgn
