#include "rcd/rcdt.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rcd/error.hpp"

namespace rcd {

namespace {
constexpr char kMagic[4] = {'R', 'C', 'D', 'T'};
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void append_rcdt(std::vector<std::uint8_t>& out, const Tensor& t) {
  if (t.rank() == 0 || t.rank() > kRcdtMaxRank) {
    throw ShapeError("RCDT supports ranks 1.." + std::to_string(kRcdtMaxRank));
  }
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kRcdtVersion);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape()) put_u32(out, static_cast<std::uint32_t>(e));
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.values()) put_f32(out, static_cast<float>(v));
}

std::vector<std::uint8_t> encode_rcdt(const Tensor& t) {
  std::vector<std::uint8_t> out;
  append_rcdt(out, t);
  return out;
}

std::span<const std::uint8_t> ByteReader::take(std::size_t length) {
  if (length > remaining()) {
    throw FormatError("unexpected end of data: wanted " +
                      std::to_string(length) + " bytes, " +
                      std::to_string(remaining()) + " left");
  }
  auto s = bytes_.subspan(pos_, length);
  pos_ += length;
  return s;
}

std::uint32_t ByteReader::u32() {
  auto b = take(4);
  return static_cast<std::uint32_t>(b[0]) |
         static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::string ByteReader::string(std::size_t length) {
  auto b = take(length);
  return std::string(b.begin(), b.end());
}

Tensor ByteReader::rcdt() {
  auto magic = take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("bad RCDT magic");
  }
  const std::uint32_t version = u32();
  if (version != kRcdtVersion) {
    throw FormatError("unsupported RCDT version " + std::to_string(version));
  }
  const std::uint32_t rank = u32();
  if (rank == 0 || rank > kRcdtMaxRank) {
    throw FormatError("invalid RCDT rank " + std::to_string(rank));
  }
  Shape shape(rank);
  std::size_t count = 1;
  for (auto& e : shape) {
    e = u32();
    if (e == 0) throw FormatError("RCDT extent of zero");
    // Each element needs 4 bytes; reject sizes the buffer cannot hold before
    // allocating anything.
    if (count > remaining() / 4 / e) {
      throw FormatError("RCDT payload larger than available data");
    }
    count *= e;
  }
  auto payload = take(4 * count);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(payload[4 * i]) |
                         static_cast<std::uint32_t>(payload[4 * i + 1]) << 8 |
                         static_cast<std::uint32_t>(payload[4 * i + 2]) << 16 |
                         static_cast<std::uint32_t>(payload[4 * i + 3]) << 24;
    data[i] = std::bit_cast<float>(bits);
  }
  return Tensor(std::move(shape), std::move(data));
}

Tensor decode_rcdt(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  Tensor t = reader.rcdt();
  if (!reader.at_end()) throw FormatError("trailing bytes after RCDT tensor");
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_bytes(path, encode_rcdt(t));
}

Tensor load_tensor(const std::filesystem::path& path) {
  return decode_rcdt(read_file_bytes(path));
}

}  // namespace rcd
