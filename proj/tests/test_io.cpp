#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <fstream>

#include "rcd/checkpoint.hpp"
#include "rcd/error.hpp"
#include "rcd/image_io.hpp"
#include "rcd/model.hpp"
#include "rcd/rcdt.hpp"
#include "rcd/training.hpp"
#include "support.hpp"

using namespace rcd;
using rcd::test::random_tensor;
using rcd::test::TempDir;

namespace {

// Writes raw rows with libpng directly, bypassing save_png.
void write_raw_png(const std::filesystem::path& path, int w, int h, int color_type,
                   int bit_depth, const std::vector<unsigned char>& data) {
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = data.size() / h;
  for (int y = 0; y < h; ++y) png_write_row(png, data.data() + y * stride);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

Tensor f32_tensor(const Shape& shape, std::mt19937_64& rng) {
  Tensor t = random_tensor(shape, rng);
  for (auto& v : t.values()) v = static_cast<float>(v);
  return t;
}

}  // namespace

TEST_CASE("RCDT round trip is exact for f32 values") {
  std::mt19937_64 rng(1);
  const Tensor t = f32_tensor({2, 3, 4}, rng);
  const auto bytes = encode_rcdt(t);
  CHECK(bytes.size() == 4 + 4 + 4 + 3 * 4 + 24 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RCDT");
  const Tensor back = decode_rcdt(bytes);
  CHECK(back == t);
  CHECK(encode_rcdt(back) == bytes);
  CHECK_THROWS_AS(encode_rcdt(Tensor()), ShapeError);
}

TEST_CASE("RCDT decoding rejects malformed input") {
  std::mt19937_64 rng(2);
  const auto bytes = encode_rcdt(f32_tensor({3, 3}, rng));
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    CHECK_THROWS_AS(decode_rcdt(std::span(bytes.data(), n)), FormatError);
  }
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_rcdt(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_rcdt(bad), FormatError);
  bad = bytes;
  bad[8] = 9;
  CHECK_THROWS_AS(decode_rcdt(bad), FormatError);
  bad = bytes;
  bad[12] = 0;
  CHECK_THROWS_AS(decode_rcdt(bad), FormatError);
  bad = bytes;
  bad[12] = 0xff;
  bad[13] = 0xff;
  bad[14] = 0xff;
  bad[15] = 0x7f;
  CHECK_THROWS_AS(decode_rcdt(bad), FormatError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_rcdt(bad), FormatError);
}

TEST_CASE("tensor and kernel-bank files") {
  TempDir dir("io");
  std::mt19937_64 rng(3);
  const KernelBank bank(f32_tensor({5, 5, 3, 3}, rng));
  save_kernel_bank(dir / "bank.rcdt", bank);
  const KernelBank back = load_kernel_bank(dir / "bank.rcdt");
  CHECK(back.filter() == bank.filter());
  CHECK(read_file_bytes(dir / "bank.rcdt") == encode_rcdt(bank.filter()));
  save_tensor(dir / "flat.rcdt", f32_tensor({4, 4}, rng));
  CHECK_THROWS_AS(load_kernel_bank(dir / "flat.rcdt"), FormatError);
  save_tensor(dir / "even.rcdt", f32_tensor({4, 4, 1, 3}, rng));
  CHECK_THROWS_AS(load_kernel_bank(dir / "even.rcdt"), FormatError);
  CHECK_THROWS_AS(load_kernel_bank(dir / "missing.rcdt"), IoError);
  CHECK_THROWS_AS(save_tensor(dir / "no" / "such" / "dir.rcdt", bank.filter()), IoError);
}

TEST_CASE("PNG round trip preserves 8-bit pixels") {
  TempDir dir("png");
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> byte(0, 255);
  Image img = make_image(7, 9);
  for (auto& v : img.values()) v = byte(rng) / 255.0;
  img[0] = 1.0;
  save_png(dir / "a.png", img);
  const Image back = load_png(dir / "a.png");
  CHECK(back == img);
  save_png(dir / "b.png", back);
  CHECK(read_file_bytes(dir / "a.png") == read_file_bytes(dir / "b.png"));
  Image out_of_range = img;
  out_of_range[0] = 1.7;
  out_of_range[1] = -0.3;
  save_png(dir / "c.png", out_of_range);
  const Image clamped = load_png(dir / "c.png");
  CHECK(clamped[0] == 1.0);
  CHECK(clamped[1] == 0.0);
}

TEST_CASE("PNG color types and unsupported depths") {
  TempDir dir("pngtypes");
  write_raw_png(dir / "gray.png", 2, 2, PNG_COLOR_TYPE_GRAY, 8, {0, 51, 102, 255});
  const Image gray = load_png(dir / "gray.png");
  for (std::size_t c = 0; c < 3; ++c) CHECK(gray.at({c, 0, 1}) == 51 / 255.0);

  std::vector<unsigned char> rgba{10, 20, 30, 0, 40, 50, 60, 255};
  write_raw_png(dir / "rgba.png", 2, 1, PNG_COLOR_TYPE_RGBA, 8, rgba);
  const Image rgb = load_png(dir / "rgba.png");
  CHECK(rgb.at({0, 0, 0}) == 10 / 255.0);
  CHECK(rgb.at({2, 0, 1}) == 60 / 255.0);

  write_raw_png(dir / "deep.png", 1, 1, PNG_COLOR_TYPE_RGB, 16, {0, 1, 0, 2, 0, 3});
  CHECK_THROWS_AS(load_png(dir / "deep.png"), UnsupportedFormat);

  std::ofstream(dir / "junk.png") << "definitely not a png";
  CHECK_THROWS_AS(load_png(dir / "junk.png"), FormatError);
  CHECK_THROWS_AS(load_png(dir / "absent.png"), IoError);

  save_png(dir / "whole.png", make_image(8, 8, 0.5));
  auto bytes = read_file_bytes(dir / "whole.png");
  bytes.resize(bytes.size() / 2);
  write_file_bytes(dir / "half.png", bytes);
  CHECK_THROWS_AS(load_png(dir / "half.png"), FormatError);
}

TEST_CASE("dataset layout round trip") {
  TempDir dir("dataset");
  std::mt19937_64 rng(5);
  for (std::size_t i : {2u, 0u, 1u}) {
    write_dataset_pair(dir.path(), dataset_id(i), random_tensor({3, 4, 4}, rng, 0, 1),
                       random_tensor({3, 4, 4}, rng, 0, 1));
  }
  save_png(dir / "rain/extra.png", make_image(4, 4));
  const DatasetScan scan = scan_dataset(dir.path());
  REQUIRE(scan.pairs.size() == 3);
  CHECK(scan.pairs[0].id == "0000");
  CHECK(scan.pairs[2].id == "0002");
  CHECK(scan.pairs[1].norain == dir.path() / "norain" / "0001.png");
  REQUIRE(scan.unmatched.size() == 1);
  CHECK(scan.unmatched[0] == "extra");
  CHECK(list_png_ids(dir / "norain") == std::vector<std::string>{"0000", "0001", "0002"});
  CHECK(dataset_id(42) == "0042");
  CHECK_THROWS_AS(scan_dataset(dir / "rain"), IoError);
}

TEST_CASE("checkpoint round trip is bitwise stable") {
  ModelConfig cfg;
  cfg.stages = 3;
  cfg.kernels = 2;
  cfg.kernel_size = 5;
  cfg.blocks = 2;
  cfg.hidden = 4;
  const LearnableSet p = init_learnable(cfg, 16, 9);
  const auto bytes = encode_checkpoint(p);
  const LearnableSet back = decode_checkpoint(bytes);
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.stages() == 3);
  CHECK(back.prox_m[1].block_count() == 2);
  CHECK(back.kernels.filter().shape() == p.kernels.filter().shape());
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(back.eta1(s) == doctest::Approx(p.eta1(s)).epsilon(1e-6));
  }
  ModelConfig none = cfg;
  none.stages = 0;
  const auto zero_bytes = encode_checkpoint(init_learnable(none, 16, 9));
  CHECK(encode_checkpoint(decode_checkpoint(zero_bytes)) == zero_bytes);
}

TEST_CASE("checkpoint decoding rejects corrupt data") {
  ModelConfig cfg;
  cfg.stages = 1;
  cfg.kernels = 2;
  cfg.kernel_size = 3;
  cfg.blocks = 1;
  cfg.hidden = 3;
  const auto bytes = encode_checkpoint(init_learnable(cfg, 8, 1));
  for (std::size_t n = 0; n < bytes.size(); n += 7) {
    CHECK_THROWS_AS(decode_checkpoint(std::span(bytes.data(), n)), FormatError);
  }
  auto extra = bytes;
  extra.push_back(1);
  CHECK_THROWS_AS(decode_checkpoint(extra), FormatError);

  // A manifest that disagrees with the stored tensors.
  const std::string text(bytes.end() - 200, bytes.end());
  const auto pos = text.find("\"stages\": 1");
  REQUIRE(pos != std::string::npos);
  auto lying = bytes;
  lying[bytes.size() - 200 + pos + 10] = '2';
  CHECK_THROWS_AS(decode_checkpoint(lying), FormatError);
}
