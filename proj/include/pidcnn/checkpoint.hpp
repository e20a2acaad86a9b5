#pragma once

// Weights file ("PIDW"), little-endian:
//
//   magic      4 bytes  "PIDW"
//   version    u32      1
//   n_tensors  u32
//   tensors    n_tensors x { name_len u16, name bytes, ndim u8, extents u32 x ndim, f32 values row-major }
//   sections   until end of file: { tag 4 bytes, length u64, payload }
//
// Tensors are the trainable parameters followed by batch-norm running
// statistics ("<layer>.running_mean", "<layer>.running_var").
// Section "ADAM": u32 count, then per parameter { name_len u16, name, step u64,
// first moment f32 x size, second moment f32 x size }.
// Section "META": JSON with the network config, epoch and global step.
// Readers skip sections with unknown tags.

#include <cstdint>
#include <filesystem>
#include <string>

#include "pidcnn/network.hpp"

namespace pidcnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelWeights<float> weights;
  std::uint64_t epoch = 0;        // completed epochs
  std::uint64_t global_step = 0;  // optimizer steps taken
};

/// Writes to a sibling temporary file, then renames over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws IoError with the path on any malformed or truncated input.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over names, shapes and value bits of every parameter and running statistic.
std::uint64_t weights_hash(const ModelWeights<float>& weights);

}  // namespace pidcnn
