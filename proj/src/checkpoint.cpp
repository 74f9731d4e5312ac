#include "rcd/checkpoint.hpp"

#include <json.hpp>
#include <map>

#include "rcd/error.hpp"
#include "rcd/rcdt.hpp"

namespace rcd {

namespace {

constexpr std::uint32_t kMaxNameLength = 256;

// Upper bounds that keep a hostile manifest from driving huge allocations.
constexpr std::size_t kMaxStages = 1024;
constexpr std::size_t kMaxChannels = 4096;

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const LearnableSet& params) {
  params.validate();
  const auto named = params.named_tensors();
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    append_rcdt(out, *t);
  }

  const std::size_t S = params.stages();
  nlohmann::ordered_json manifest;
  manifest["format"] = "rcd-checkpoint";
  manifest["version"] = 1;
  manifest["stages"] = S;
  manifest["kernels"] = params.kernels.count();
  manifest["kernel_size"] = params.kernels.kernel_size();
  manifest["blocks"] = S > 0 ? params.prox_m[0].block_count() : 0;
  manifest["hidden"] = S > 0 ? params.prox_m[0].hidden_channels() : 0;
  std::vector<double> eta1, eta2;
  for (std::size_t s = 0; s < S; ++s) {
    // Step sizes as a reader of the stored f32 values will see them.
    eta1.push_back(static_cast<float>(softplus(static_cast<float>(params.eta1_raw[s]))));
    eta2.push_back(static_cast<float>(sigmoid(static_cast<float>(params.eta2_raw[s]))));
  }
  manifest["eta1"] = eta1;
  manifest["eta2"] = eta2;
  manifest["tensors"] = named.size();
  const std::string text = manifest.dump(2) + "\n";
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

LearnableSet decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  const std::uint32_t count = reader.u32();
  // Every entry needs at least a name length and an RCDT header.
  if (count > reader.remaining() / 20) {
    throw FormatError("checkpoint tensor count " + std::to_string(count) +
                      " exceeds file size");
  }
  std::map<std::string, Tensor> tensors;
  std::vector<std::string> order;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = reader.u32();
    if (len == 0 || len > kMaxNameLength) {
      throw FormatError("invalid tensor name length " + std::to_string(len));
    }
    std::string name = reader.string(len);
    if (tensors.count(name)) throw FormatError("duplicate tensor " + name);
    tensors.emplace(name, reader.rcdt());
    order.push_back(std::move(name));
  }
  const std::uint32_t manifest_len = reader.u32();
  const std::string text = reader.string(manifest_len);
  if (!reader.at_end()) throw FormatError("trailing bytes after checkpoint manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }

  std::size_t S = 0, N = 0, k = 0, T = 0, hidden = 0;
  try {
    if (manifest.at("format").get<std::string>() != "rcd-checkpoint" ||
        manifest.at("version").get<int>() != 1) {
      throw FormatError("unsupported checkpoint format or version");
    }
    S = manifest.at("stages").get<std::size_t>();
    N = manifest.at("kernels").get<std::size_t>();
    k = manifest.at("kernel_size").get<std::size_t>();
    T = manifest.at("blocks").get<std::size_t>();
    hidden = manifest.at("hidden").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest incomplete: ") + e.what());
  }
  if (S > kMaxStages || N > kMaxChannels || hidden > kMaxChannels ||
      T > kMaxStages || k == 0 || k % 2 == 0 || N == 0) {
    throw FormatError("checkpoint manifest has out-of-range architecture values");
  }
  if (S > 0 && (T == 0 || hidden < N || hidden < 3)) {
    throw FormatError("checkpoint manifest has an invalid prox architecture");
  }

  // Build the expected structure from the manifest, then fill it by name.
  LearnableSet p;
  p.kernels = KernelBank::zeros(k, N);
  p.init_kernel = Tensor({3, 3, 3, 3});
  for (std::size_t s = 0; s < S; ++s) {
    p.prox_m.push_back(zero_prox_params(N, hidden, T));
    p.prox_b.push_back(zero_prox_params(3, hidden, T));
  }
  if (S > 0) {
    p.eta1_raw = Tensor({S});
    p.eta2_raw = Tensor({S});
  }
  auto expected = p.named_tensors();
  if (expected.size() != tensors.size()) {
    throw FormatError("checkpoint holds " + std::to_string(tensors.size()) +
                      " tensors, manifest (S=" + std::to_string(S) + ") implies " +
                      std::to_string(expected.size()));
  }
  for (auto& [name, slot] : expected) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint is missing tensor " + name);
    if (name != "init_kernel" && it->second.shape() != slot->shape()) {
      throw FormatError("tensor " + name + " has shape " +
                        shape_string(it->second.shape()) + ", expected " +
                        shape_string(slot->shape()));
    }
    if (!it->second.all_finite()) throw FormatError("tensor " + name + " is not finite");
    *slot = std::move(it->second);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint is inconsistent: ") + e.what());
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const LearnableSet& params) {
  write_file_bytes(path, encode_checkpoint(params));
}

LearnableSet load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace rcd
