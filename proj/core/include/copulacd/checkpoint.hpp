#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "copulacd/marginals.hpp"
#include "copulacd/neural_copula.hpp"

namespace copulacd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything inference needs from training: the network, both marginal
/// CDF tables, the training features (so classical backends can be fitted
/// on the same sample) and a free-form config dump.
struct Checkpoint {
  CopulaNet net;
  CdfTable table1;
  CdfTable table2;
  std::vector<std::uint8_t> g1;
  std::vector<std::uint8_t> g2;
  std::string config_text;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Little-endian binary encoding with magic, version and FNV-1a checksum.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);

/// Throws DataError on bad magic, unsupported version, truncation or
/// checksum mismatch.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace copulacd
