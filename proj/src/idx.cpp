#include "ewgn/idx.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "ewgn/errors.hpp"

namespace ewgn {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void write_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 24));
  b.push_back(static_cast<std::uint8_t>(v >> 16));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw IoError("gzip: inflateInit failed");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::uint8_t buf[1 << 16];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw IoError("gzip: corrupt stream (zlib rc " + std::to_string(rc) + ")");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

}  // namespace

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw DataError("idx images: header truncated");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImagesMagic)
    throw DataError("idx images: bad magic " + std::to_string(magic) + ", expected " +
                    std::to_string(kIdxImagesMagic));
  IdxImages im;
  im.count = read_be32(bytes, 4);
  im.rows = read_be32(bytes, 8);
  im.cols = read_be32(bytes, 12);
  const std::size_t body = std::size_t(im.count) * im.rows * im.cols;
  if (bytes.size() != 16 + body)
    throw DataError("idx images: body length " + std::to_string(bytes.size() - 16) +
                    " does not match header (" + std::to_string(body) + " expected)");
  im.pixels.assign(bytes.begin() + 16, bytes.end());
  return im;
}

std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8) throw DataError("idx labels: header truncated");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxLabelsMagic)
    throw DataError("idx labels: bad magic " + std::to_string(magic) + ", expected " +
                    std::to_string(kIdxLabelsMagic));
  const std::uint32_t count = read_be32(bytes, 4);
  if (bytes.size() != 8 + count)
    throw DataError("idx labels: body length " + std::to_string(bytes.size() - 8) +
                    " does not match header count " + std::to_string(count));
  std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.end());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 9)
      throw DataError("idx labels: label " + std::to_string(int(labels[i])) + " at index " +
                      std::to_string(i) + " out of range [0,10)");
  return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, images.count);
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B) return gunzip(bytes);
  return bytes;
}

}  // namespace ewgn
