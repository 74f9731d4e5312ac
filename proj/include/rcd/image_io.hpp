#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rcd/tensor.hpp"

namespace rcd {

// 8-bit PNG <-> Image with byte b <-> b / 255. RGB, RGBA (alpha dropped),
// gray (replicated) and palette images load; 16-bit raises UnsupportedFormat.
Image load_png(const std::filesystem::path& path);

// Values are clamped to [0, 1] and rounded to the nearest byte.
void save_png(const std::filesystem::path& path, const Image& img);

// Dataset layout: <root>/rain/<id>.png and <root>/norain/<id>.png.
struct DatasetEntry {
  std::string id;
  std::filesystem::path rain;
  std::filesystem::path norain;

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetScan {
  std::vector<DatasetEntry> pairs;     // sorted by id
  std::vector<std::string> unmatched;  // ids present on one side only
};

DatasetScan scan_dataset(const std::filesystem::path& root);
void write_dataset_pair(const std::filesystem::path& root, const std::string& id,
                        const Image& rainy, const Image& clean);
std::string dataset_id(std::size_t index);

// Sorted ids of *.png files directly inside a directory.
std::vector<std::string> list_png_ids(const std::filesystem::path& dir);

}  // namespace rcd
