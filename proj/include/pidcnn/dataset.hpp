#pragma once

// Binocular dataset file ("PIDB"), little-endian:
//
//   magic      4 bytes  "PIDB"
//   version    u32      1
//   n_records  u32
//   views      u32      2
//   height     u32
//   width      u32
//   seed       u64
//   records    n_records x { position 3 x f32, views x height x width u8 }

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pidcnn/scene.hpp"

namespace pidcnn {

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 32;

struct Dataset {
  std::uint32_t views = scene::kViews;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint64_t seed = 0;
  std::vector<std::array<float, 3>> positions;
  std::vector<std::uint8_t> pixels;  // record-major, then view, then row-major image

  std::size_t size() const noexcept { return positions.size(); }
  bool empty() const noexcept { return positions.empty(); }
  std::size_t image_bytes() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t record_bytes() const noexcept { return 12 + views * image_bytes(); }

  Vec3 position(std::size_t record) const;
  std::span<const std::uint8_t> image(std::size_t record, std::size_t view) const;
};

/// Renders `count` records with positions drawn from Rng(seed). Positions are
/// rounded to f32 before rendering so stored labels and images agree.
Dataset generate_dataset(std::size_t count, std::uint64_t seed, const CameraRig& rig);

/// Throws IoError with the path on failure.
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// generate_dataset followed by write_dataset.
Dataset generate_dataset_file(std::size_t count, std::uint64_t seed, const CameraRig& rig,
                              const std::filesystem::path& path);

/// Halves height and width by averaging each 2x2 block (rounded). Positions are kept.
Dataset downsample_dataset(const Dataset& data);

/// A motion observation: T records and the derived targets.
struct MotionSample {
  std::vector<std::size_t> records;
  std::vector<Vec3> positions;
  std::vector<double> targets;  // ground_truth(positions), world units
};

/// Frame 1 is record `index`; later frames are drawn uniformly from the dataset.
MotionSample assemble_sample(const Dataset& data, std::size_t index, Rng& rng, std::size_t frames);

}  // namespace pidcnn
