#include "rcd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include "rcd/error.hpp"

namespace rcd {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

Image load_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + " is not a PNG file");
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           png_error_fn, png_warning_fn);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }

  // Everything touched after setjmp must outlive a longjmp back here.
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  bool unsupported = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr,
               nullptr);
  if (bit_depth == 16) {
    unsupported = true;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY ||
        color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    if (stride != static_cast<std::size_t>(w) * 3) {
      unsupported = true;
    } else {
      pixels.resize(stride * h);
      rows.resize(h);
      for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * stride;
      png_read_image(png, rows.data());
      png_read_end(png, nullptr);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (unsupported) {
    throw UnsupportedFormat(path.string() + ": only 8-bit PNG images are supported (bit depth " +
                            std::to_string(bit_depth) + ")");
  }
  if (w == 0 || h == 0) throw FormatError(path.string() + ": empty image");

  Image img = make_image(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        img.plane(c)[y * w + x] = pixels[(y * w + x) * 3 + c] / 255.0;
      }
    }
  }
  return img;
}

void save_png(const fs::path& path, const Image& img) {
  require_image(img, "save_png");
  const std::size_t h = height(img), w = width(img);
  std::vector<png_byte> pixels(h * w * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(img.plane(c)[y * w + x], 0.0, 1.0);
        pixels[(y * w + x) * 3 + c] = static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * 3;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            png_error_fn, png_warning_fn);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed for " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::string dataset_id(std::size_t index) {
  std::ostringstream out;
  out << std::setw(4) << std::setfill('0') << index;
  return out.str();
}

std::vector<std::string> list_png_ids(const fs::path& dir) {
  std::vector<std::string> ids;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

DatasetScan scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root / "rain") || !fs::is_directory(root / "norain")) {
    throw IoError("dataset " + root.string() +
                  " must contain rain/ and norain/ directories");
  }
  const auto rain = list_png_ids(root / "rain");
  const auto clean = list_png_ids(root / "norain");
  const std::set<std::string> clean_set(clean.begin(), clean.end());
  const std::set<std::string> rain_set(rain.begin(), rain.end());
  DatasetScan scan;
  for (const auto& id : rain) {
    if (clean_set.count(id)) {
      scan.pairs.push_back({id, root / "rain" / (id + ".png"),
                            root / "norain" / (id + ".png")});
    } else {
      scan.unmatched.push_back(id);
    }
  }
  for (const auto& id : clean) {
    if (!rain_set.count(id)) scan.unmatched.push_back(id);
  }
  std::sort(scan.unmatched.begin(), scan.unmatched.end());
  return scan;
}

void write_dataset_pair(const fs::path& root, const std::string& id,
                        const Image& rainy, const Image& clean) {
  fs::create_directories(root / "rain");
  fs::create_directories(root / "norain");
  save_png(root / "rain" / (id + ".png"), rainy);
  save_png(root / "norain" / (id + ".png"), clean);
}

}  // namespace rcd
