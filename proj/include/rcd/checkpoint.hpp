#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rcd/training.hpp"

namespace rcd {

// Checkpoint container:
//   u32 tensor count
//   count x (u32 name length | name bytes | RCDT blob)
//   u32 manifest length | manifest (UTF-8 JSON: S, N, k, T, hidden, etas)
// Payloads are f32, so load(save(x)) is exact for f32-representable values
// and save(load(save(x))) reproduces the original bytes.
std::vector<std::uint8_t> encode_checkpoint(const LearnableSet& params);
LearnableSet decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const LearnableSet& params);
LearnableSet load_checkpoint(const std::filesystem::path& path);

}  // namespace rcd
