#include "pidcnn/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pidcnn/errors.hpp"

namespace pidcnn {
namespace {

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::vector<char>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

Vec3 Dataset::position(std::size_t record) const {
  const auto& p = positions.at(record);
  return {p[0], p[1], p[2]};
}

std::span<const std::uint8_t> Dataset::image(std::size_t record, std::size_t view) const {
  if (record >= size() || view >= views) throw std::out_of_range("Dataset::image: index out of range");
  return {pixels.data() + (record * views + view) * image_bytes(), image_bytes()};
}

Dataset generate_dataset(std::size_t count, std::uint64_t seed, const CameraRig& rig) {
  Dataset d;
  d.views = scene::kViews;
  d.height = d.width = static_cast<std::uint32_t>(rig.image_size);
  d.seed = seed;
  d.positions.reserve(count);
  d.pixels.resize(count * d.views * d.image_bytes());
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 p = sample_position(rng);
    const std::array<float, 3> stored{static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
    d.positions.push_back(stored);
    const Vec3 q{stored[0], stored[1], stored[2]};
    for (std::size_t v = 0; v < d.views; ++v) {
      render_view(q, rig, v, std::span(d.pixels.data() + (i * d.views + v) * d.image_bytes(), d.image_bytes()));
    }
  }
  return d;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::vector<char> header;
  header.insert(header.end(), {'P', 'I', 'D', 'B'});
  put_u32(header, kDatasetVersion);
  put_u32(header, static_cast<std::uint32_t>(data.size()));
  put_u32(header, data.views);
  put_u32(header, data.height);
  put_u32(header, data.width);
  put_u64(header, data.seed);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open dataset for writing: " + path.string());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<char> record;
  for (std::size_t i = 0; i < data.size(); ++i) {
    record.clear();
    for (float f : data.positions[i]) put_f32(record, f);
    const auto* px = data.pixels.data() + i * data.views * data.image_bytes();
    record.insert(record.end(), px, px + data.views * data.image_bytes());
    os.write(record.data(), static_cast<std::streamsize>(record.size()));
  }
  if (!os) throw IoError("write failed for dataset: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset: " + path.string());
  unsigned char header[kDatasetHeaderBytes];
  if (!is.read(reinterpret_cast<char*>(header), sizeof header)) {
    throw IoError("truncated dataset header: " + path.string());
  }
  if (std::memcmp(header, "PIDB", 4) != 0) throw IoError("not a PIDB dataset (bad magic): " + path.string());
  const auto version = static_cast<std::uint32_t>(get_le(header + 4, 4));
  if (version != kDatasetVersion) {
    throw IoError("unsupported dataset version " + std::to_string(version) + " (expected " +
                  std::to_string(kDatasetVersion) + "): " + path.string());
  }
  Dataset d;
  const auto n = static_cast<std::uint32_t>(get_le(header + 8, 4));
  d.views = static_cast<std::uint32_t>(get_le(header + 12, 4));
  d.height = static_cast<std::uint32_t>(get_le(header + 16, 4));
  d.width = static_cast<std::uint32_t>(get_le(header + 20, 4));
  d.seed = get_le(header + 24, 8);
  if (d.views == 0 || d.height == 0 || d.width == 0) throw IoError("dataset header has zero extents: " + path.string());

  d.positions.resize(n);
  d.pixels.resize(static_cast<std::size_t>(n) * d.views * d.image_bytes());
  std::vector<unsigned char> record(d.record_bytes());
  for (std::size_t i = 0; i < n; ++i) {
    if (!is.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(record.size()))) {
      throw IoError("truncated dataset at record " + std::to_string(i) + ": " + path.string());
    }
    for (int k = 0; k < 3; ++k) {
      d.positions[i][k] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(record.data() + 4 * k, 4)));
    }
    std::memcpy(d.pixels.data() + i * d.views * d.image_bytes(), record.data() + 12, d.views * d.image_bytes());
  }
  return d;
}

Dataset generate_dataset_file(std::size_t count, std::uint64_t seed, const CameraRig& rig,
                              const std::filesystem::path& path) {
  Dataset d = generate_dataset(count, seed, rig);
  write_dataset(d, path);
  return d;
}

Dataset downsample_dataset(const Dataset& data) {
  if (data.height % 2 != 0 || data.width % 2 != 0) throw std::invalid_argument("downsample_dataset: odd image extents");
  Dataset out = data;
  out.height = data.height / 2;
  out.width = data.width / 2;
  out.pixels.assign(data.size() * data.views * out.image_bytes(), 0);
  for (std::size_t r = 0; r < data.size(); ++r)
    for (std::size_t v = 0; v < data.views; ++v) {
      const auto img = data.image(r, v);
      auto* dst = out.pixels.data() + (r * data.views + v) * out.image_bytes();
      for (std::size_t i = 0; i < out.height; ++i)
        for (std::size_t j = 0; j < out.width; ++j) {
          const std::size_t a = 2 * i * data.width + 2 * j;
          const unsigned s = img[a] + img[a + 1] + img[a + data.width] + img[a + data.width + 1];
          dst[i * out.width + j] = static_cast<std::uint8_t>((s + 2) / 4);
        }
    }
  return out;
}

MotionSample assemble_sample(const Dataset& data, std::size_t index, Rng& rng, std::size_t frames) {
  if (data.empty()) throw std::invalid_argument("assemble_sample: dataset is empty");
  if (index >= data.size()) {
    throw std::out_of_range("assemble_sample: index " + std::to_string(index) + " outside dataset of " +
                            std::to_string(data.size()));
  }
  target_length(frames);  // validates the frame count
  MotionSample s;
  s.records.push_back(index);
  for (std::size_t f = 1; f < frames; ++f) s.records.push_back(rng.below(data.size()));
  for (std::size_t r : s.records) s.positions.push_back(data.position(r));
  s.targets = ground_truth(s.positions);
  return s;
}

}  // namespace pidcnn
