#include "mpad/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mpad/config.hpp"
#include "mpad/fusion.hpp"

namespace mpad::io {

namespace {

constexpr char kMagic[8] = {'M', 'P', 'A', 'D', 'C', 'K', 'P', '1'};

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::vector<unsigned char> to_f32_le(const std::vector<double>& values) {
  std::vector<unsigned char> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int k = 0; k < 4; ++k) out[i * 4 + k] = static_cast<unsigned char>(bits >> (8 * k));
  }
  return out;
}

std::vector<double> from_f32_le(const unsigned char* bytes, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[i * 4 + k]) << (8 * k);
    float f;
    std::memcpy(&f, &bits, 4);
    out[i] = static_cast<double>(f);
  }
  return out;
}

}  // namespace

void save_checkpoint(svdd::SvddModel& model, const std::string& path,
                     const CheckpointMeta& meta) {
  // Normalize the model to checkpoint precision before writing.
  for (auto& [name, t] : model.encoder.params())
    for (double& v : t.mutable_data()) v = static_cast<double>(static_cast<float>(v));

  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["net_spec"] = netspec_json(model.encoder.spec());
  manifest["fusion_tag"] = fusion::fusion_tag_str(model.fusion_tag);
  manifest["sphere"] = {{"center", model.sphere.center}, {"radius", model.sphere.radius}};
  manifest["hp"] = {{"nu", model.hp.nu},
                    {"weight_decay", model.hp.weight_decay},
                    {"warmup_epochs", model.hp.warmup_epochs},
                    {"epochs", model.hp.epochs},
                    {"lr", model.hp.lr},
                    {"batch_size", model.hp.batch_size}};
  manifest["training_seed"] = meta.training_seed;
  manifest["dataset_fingerprint"] = meta.dataset_fingerprint;
  manifest["config_hash"] = meta.config_hash;

  std::vector<unsigned char> blobs;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, t] : model.encoder.params()) {
    const auto bytes = to_f32_le(t.data());
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.shape();
    entry["offset"] = blobs.size();
    entry["length"] = bytes.size();
    entry["crc32"] = crc32(bytes.data(), bytes.size());
    tensors.push_back(entry);
    blobs.insert(blobs.end(), bytes.begin(), bytes.end());
  }
  manifest["tensors"] = tensors;

  const std::string mstr = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  write_u64_le(out, mstr.size());
  out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
  out.write(reinterpret_cast<const char*>(blobs.data()),
            static_cast<std::streamsize>(blobs.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const std::uint64_t mlen = read_u64_le(in);
  std::string mstr(mlen, '\0');
  in.read(mstr.data(), static_cast<std::streamsize>(mlen));
  if (!in) throw std::runtime_error("checkpoint: truncated manifest");
  const nlohmann::json manifest = nlohmann::json::parse(mstr);

  const int version = manifest.at("format_version").get<int>();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint format version " + std::to_string(version) +
                             " is newer than supported version " +
                             std::to_string(kCheckpointVersion) +
                             "; upgrade this tool to read it");

  std::vector<unsigned char> blobs((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  nets::NamedParams params;
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const nd::Shape shape = entry.at("shape").get<nd::Shape>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t length = entry.at("length").get<std::size_t>();
    if (offset + length > blobs.size())
      throw std::runtime_error("checkpoint: blob '" + name + "' at offset " +
                               std::to_string(offset) + " runs past end of file");
    if (length != nd::shape_numel(shape) * 4)
      throw std::runtime_error("checkpoint: blob '" + name +
                               "' length disagrees with its shape");
    const std::uint32_t expect = entry.at("crc32").get<std::uint32_t>();
    const std::uint32_t got = crc32(blobs.data() + offset, length);
    if (expect != got)
      throw std::runtime_error("checkpoint: blob '" + name + "' at offset " +
                               std::to_string(offset) + " failed its integrity check");
    params.emplace_back(
        name, nd::Tensor::from_data(shape, from_f32_le(blobs.data() + offset, length / 4),
                                    true));
  }

  LoadedCheckpoint out;
  const nets::NetSpec spec = netspec_from_json(manifest.at("net_spec"));
  out.model.encoder = nets::Encoder(spec, std::move(params));
  out.model.fusion_tag = fusion::fusion_tag_from_str(manifest.at("fusion_tag").get<std::string>());
  out.model.sphere.center = manifest.at("sphere").at("center").get<std::vector<double>>();
  out.model.sphere.radius = manifest.at("sphere").at("radius").get<double>();
  const auto& hp = manifest.at("hp");
  out.model.hp.nu = hp.at("nu").get<double>();
  out.model.hp.weight_decay = hp.at("weight_decay").get<double>();
  out.model.hp.warmup_epochs = hp.at("warmup_epochs").get<int>();
  out.model.hp.epochs = hp.at("epochs").get<int>();
  out.model.hp.lr = hp.at("lr").get<double>();
  out.model.hp.batch_size = hp.at("batch_size").get<int>();
  out.meta.training_seed = manifest.at("training_seed").get<std::uint64_t>();
  out.meta.dataset_fingerprint = manifest.at("dataset_fingerprint").get<std::string>();
  out.meta.config_hash = manifest.at("config_hash").get<std::string>();
  if (static_cast<int>(out.model.sphere.center.size()) != spec.latent_dim)
    throw std::runtime_error("checkpoint: sphere center dimension disagrees with net spec");
  return out;
}

}  // namespace mpad::io
