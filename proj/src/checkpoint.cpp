#include "pidcnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "pidcnn/errors.hpp"

namespace pidcnn {
namespace {

const std::string kMean = ".running_mean";
const std::string kVar = ".running_var";

class Writer {
 public:
  void u8(std::uint8_t v) { bytes.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void raw(const std::string& s) { bytes.insert(bytes.end(), s.begin(), s.end()); }
  void name(const std::string& s) {
    if (s.size() > 0xFFFF) throw std::invalid_argument("checkpoint: tensor name too long: " + s);
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s);
  }
  void floats(std::span<const float> values) {
    for (float f : values) u32(std::bit_cast<std::uint32_t>(f));
  }
  void tensor(const std::string& n, const Tensor& t) {
    name(n);
    u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t e : t.shape()) u32(static_cast<std::uint32_t>(e));
    floats(t.data());
  }

  std::vector<char> bytes;

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& data, std::string path) : data_(data), path_(std::move(path)) {}

  bool done() const { return pos_ == data_.size(); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string name() { return raw(u16()); }
  void floats(std::span<float> out) {
    need(out.size() * 4);
    for (auto& f : out) f = std::bit_cast<float>(u32());
  }
  Tensor tensor() {
    const std::size_t ndim = u8();
    if (ndim == 0 || ndim > kMaxRank) fail("tensor rank " + std::to_string(ndim) + " out of range");
    Shape shape(ndim);
    for (auto& e : shape) {
      e = u32();
      if (e == 0) fail("zero tensor extent");
    }
    Tensor t(shape);
    floats(t.data());
    return t;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("bad checkpoint (" + what + "): " + path_);
  }
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated at byte " + std::to_string(pos_));
  }

 private:
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  const std::vector<unsigned char>& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

nlohmann::json config_json(const NetworkConfig& c) {
  return {{"image_size", c.image_size}, {"n_blocks", c.n_blocks},       {"input_channels", c.input_channels},
          {"frames", c.frames},         {"pooling", to_string(c.pooling)}, {"activation", to_string(c.activation)}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.image_size = j.at("image_size").get<std::size_t>();
  c.n_blocks = j.at("n_blocks").get<std::size_t>();
  c.input_channels = j.at("input_channels").get<std::size_t>();
  c.frames = j.at("frames").get<std::size_t>();
  c.pooling = parse_pooling(j.at("pooling").get<std::string>());
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.validate();
  return c;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& w = ckpt.weights;
  Writer out;
  out.raw("PIDW");
  out.u32(kCheckpointVersion);
  std::size_t stats = 0;
  for (const auto& [name, st] : w.buffers) stats += (st.mean ? 1 : 0) + (st.var ? 1 : 0);
  out.u32(static_cast<std::uint32_t>(w.params.size() + stats));
  for (const auto& p : w.params) out.tensor(p.name, p.value);
  for (const auto& [name, st] : w.buffers) {
    if (st.mean) out.tensor(name + kMean, *st.mean);
    if (st.var) out.tensor(name + kVar, *st.var);
  }

  Writer adam;
  adam.u32(static_cast<std::uint32_t>(w.params.size()));
  for (const auto& p : w.params) {
    adam.name(p.name);
    adam.u64(p.step);
    adam.floats(p.first_moment.data());
    adam.floats(p.second_moment.data());
  }
  out.raw("ADAM");
  out.u64(adam.bytes.size());
  out.bytes.insert(out.bytes.end(), adam.bytes.begin(), adam.bytes.end());

  nlohmann::json meta{{"config", config_json(w.config)},
                      {"fingerprint", w.config.fingerprint()},
                      {"epoch", ckpt.epoch},
                      {"global_step", ckpt.global_step}};
  const std::string text = meta.dump();
  out.raw("META");
  out.u64(text.size());
  out.raw(text);

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + tmp.string());
    os.write(out.bytes.data(), static_cast<std::streamsize>(out.bytes.size()));
    if (!os) throw IoError("write failed for checkpoint: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + path.string() + " (" + ec.message() + ")");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  const std::vector<unsigned char> data{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  Reader in(data, path.string());

  const std::string magic = in.raw(4);
  if (magic != "PIDW") in.fail("magic '" + magic + "', expected 'PIDW'");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    in.fail("version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
  }
  const std::uint32_t count = in.u32();
  std::vector<std::pair<std::string, Tensor>> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.name();
    tensors.emplace_back(std::move(name), in.tensor());
  }

  std::optional<nlohmann::json> meta;
  std::vector<unsigned char> adam_bytes;
  bool has_adam = false;
  while (!in.done()) {
    const std::string tag = in.raw(4);
    const std::uint64_t length = in.u64();
    in.need(length);
    const std::string payload = in.raw(length);
    if (tag == "META") {
      try {
        meta = nlohmann::json::parse(payload);
      } catch (const nlohmann::json::exception& e) {
        in.fail(std::string("unreadable META section: ") + e.what());
      }
    } else if (tag == "ADAM") {
      adam_bytes.assign(payload.begin(), payload.end());
      has_adam = true;
    }
  }
  if (!meta) in.fail("missing META section");

  Checkpoint ckpt;
  try {
    ckpt.weights.config = config_from_json(meta->at("config"));
    ckpt.epoch = meta->at("epoch").get<std::uint64_t>();
    ckpt.global_step = meta->at("global_step").get<std::uint64_t>();
  } catch (const std::exception& e) {
    in.fail(std::string("invalid META: ") + e.what());
  }

  // The architecture fixes which tensors must be present and their shapes.
  const auto reference = init_weights<float>(ckpt.weights.config, 0);
  for (auto& [name, t] : tensors) {
    if (ends_with(name, kMean) || ends_with(name, kVar)) {
      const bool mean = ends_with(name, kMean);
      const std::string layer = name.substr(0, name.size() - (mean ? kMean : kVar).size());
      auto ref = reference.buffers.find(layer);
      if (ref == reference.buffers.end() || ref->second.mean->shape() != t.shape()) in.fail("unexpected tensor " + name);
      (mean ? ckpt.weights.buffers[layer].mean : ckpt.weights.buffers[layer].var) = std::move(t);
      continue;
    }
    if (!reference.params.contains(name) || reference.params.at(name).value.shape() != t.shape()) {
      in.fail("unexpected tensor " + name + " " + to_string(t.shape()));
    }
    if (ckpt.weights.params.contains(name)) in.fail("duplicate tensor " + name);
    ckpt.weights.params.add(name, std::move(t));
  }
  if (ckpt.weights.params.size() != reference.params.size()) {
    in.fail(std::to_string(ckpt.weights.params.size()) + " parameters, architecture needs " +
            std::to_string(reference.params.size()));
  }

  if (has_adam) {
    Reader ar(adam_bytes, path.string() + " [ADAM]");
    const std::uint32_t n = ar.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::string name = ar.name();
      if (!ckpt.weights.params.contains(name)) ar.fail("optimizer state for unknown parameter " + name);
      auto& p = ckpt.weights.params.at(name);
      p.step = ar.u64();
      ar.floats(p.first_moment.data());
      ar.floats(p.second_moment.data());
    }
  }
  return ckpt;
}

std::uint64_t weights_hash(const ModelWeights<float>& weights) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  auto tensor = [&](const std::string& name, const Tensor& t) {
    mix(name.data(), name.size());
    for (std::size_t e : t.shape()) mix(&e, sizeof e);
    mix(t.data().data(), t.size() * sizeof(float));
  };
  for (const auto& p : weights.params) tensor(p.name, p.value);
  for (const auto& [name, st] : weights.buffers) {
    if (st.mean) tensor(name + kMean, *st.mean);
    if (st.var) tensor(name + kVar, *st.var);
  }
  return h;
}

}  // namespace pidcnn
