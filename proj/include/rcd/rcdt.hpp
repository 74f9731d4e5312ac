#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rcd/tensor.hpp"

namespace rcd {

// RCDT tensor blob:
//   "RCDT" | u32 version (=1) | u32 rank | rank x u32 extents | f32 payload
// All integers and floats little-endian, payload row-major.
inline constexpr std::uint32_t kRcdtVersion = 1;
inline constexpr std::uint32_t kRcdtMaxRank = 8;

void append_rcdt(std::vector<std::uint8_t>& out, const Tensor& t);
std::vector<std::uint8_t> encode_rcdt(const Tensor& t);

// Bounds-checked little-endian cursor over a byte buffer. Every read throws
// FormatError instead of running past the end.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32();
  float f32();
  std::string string(std::size_t length);
  std::span<const std::uint8_t> take(std::size_t length);
  Tensor rcdt();

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);

Tensor decode_rcdt(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace rcd
