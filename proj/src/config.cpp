#include "mpad/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpad::io {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json netspec_json(const nets::NetSpec& spec) {
  return json{{"in_channels", spec.in_channels}, {"height", spec.height},
              {"width", spec.width},             {"conv_channels", spec.conv_channels},
              {"kernel", spec.kernel},           {"stride", spec.stride},
              {"padding", spec.padding},         {"latent_dim", spec.latent_dim},
              {"leaky_slope", spec.leaky_slope}};
}

nets::NetSpec netspec_from_json(const json& j) {
  reject_unknown_keys(j, {"in_channels", "height", "width", "conv_channels", "kernel",
                          "stride", "padding", "latent_dim", "leaky_slope", "bias"},
                      "net");
  // The hypersphere-collapse guard: bias terms let the encoder realize a
  // constant map, so any request for them is refused outright.
  if (j.contains("bias") && j.at("bias").get<bool>())
    throw std::invalid_argument(
        "config: bias terms are not supported: a biased encoder can collapse the "
        "hypersphere by mapping every input to a constant center; set \"bias\": false "
        "or remove the key");
  nets::NetSpec spec;
  get_if(j, "in_channels", spec.in_channels);
  get_if(j, "height", spec.height);
  get_if(j, "width", spec.width);
  get_if(j, "conv_channels", spec.conv_channels);
  get_if(j, "kernel", spec.kernel);
  get_if(j, "stride", spec.stride);
  get_if(j, "padding", spec.padding);
  get_if(j, "latent_dim", spec.latent_dim);
  get_if(j, "leaky_slope", spec.leaky_slope);
  return spec;
}

ExperimentConfig parse_config(const json& j) {
  reject_unknown_keys(j, {"dataset", "fusion", "denoise", "noise_sigma", "augment_set",
                          "net", "pretrain", "svdd", "seeds", "out_dir"},
                      "top level");
  ExperimentConfig cfg;

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown_keys(d, {"source", "images_path", "labels_path", "normal_digit",
                            "n_train_stacks", "n_test", "normal_frac", "target_size",
                            "train_manifest", "test_manifest", "n_train", "image_size",
                            "anomaly_mix", "pixel_noise_sigma", "anomaly_frac"},
                        "dataset");
    std::string source = "synth_dices";
    get_if(d, "source", source);
    if (source == "idx")
      cfg.dataset.source = DataSource::idx;
    else if (source == "dices_manifest")
      cfg.dataset.source = DataSource::dices_manifest;
    else if (source == "synth_dices")
      cfg.dataset.source = DataSource::synth_dices;
    else
      throw std::invalid_argument("config: unknown dataset source '" + source + "'");
    get_if(d, "images_path", cfg.dataset.images_path);
    get_if(d, "labels_path", cfg.dataset.labels_path);
    get_if(d, "normal_digit", cfg.dataset.mnist.normal_digit);
    get_if(d, "n_train_stacks", cfg.dataset.mnist.n_train_stacks);
    get_if(d, "normal_frac", cfg.dataset.mnist.normal_frac);
    get_if(d, "target_size", cfg.dataset.mnist.target_size);
    get_if(d, "train_manifest", cfg.dataset.train_manifest);
    get_if(d, "test_manifest", cfg.dataset.test_manifest);
    get_if(d, "n_train", cfg.dataset.synth.n_train);
    get_if(d, "image_size", cfg.dataset.synth.image_size);
    get_if(d, "anomaly_mix", cfg.dataset.synth.anomaly_mix);
    get_if(d, "pixel_noise_sigma", cfg.dataset.synth.pixel_noise_sigma);
    get_if(d, "anomaly_frac", cfg.dataset.synth.anomaly_frac);
    if (d.contains("n_test")) {
      cfg.dataset.mnist.n_test = d.at("n_test").get<int>();
      cfg.dataset.synth.n_test = cfg.dataset.mnist.n_test;
    }
  }

  if (j.contains("fusion"))
    cfg.fusion = fusion::fusion_tag_from_str(j.at("fusion").get<std::string>());
  get_if(j, "denoise", cfg.denoise);
  get_if(j, "noise_sigma", cfg.noise_sigma);
  get_if(j, "augment_set", cfg.augment_set);
  const std::set<std::string> aug_sets = {"none", "all", "no_erase", "no_constituents",
                                          "no_geometry"};
  if (!aug_sets.count(cfg.augment_set))
    throw std::invalid_argument("config: unknown augment_set '" + cfg.augment_set + "'");

  if (j.contains("net")) cfg.net = netspec_from_json(j.at("net"));

  if (j.contains("pretrain")) {
    const json& p = j.at("pretrain");
    reject_unknown_keys(p, {"epochs", "lr", "weight_decay", "batch_size"}, "pretrain");
    get_if(p, "epochs", cfg.pretrain.epochs);
    get_if(p, "lr", cfg.pretrain.lr);
    get_if(p, "weight_decay", cfg.pretrain.weight_decay);
    get_if(p, "batch_size", cfg.pretrain.batch_size);
  }
  cfg.pretrain.denoise = cfg.denoise;
  cfg.pretrain.noise_sigma = cfg.noise_sigma;

  if (j.contains("svdd")) {
    const json& s = j.at("svdd");
    reject_unknown_keys(s, {"nu", "weight_decay", "warmup_epochs", "epochs", "lr", "batch_size"},
                        "svdd");
    get_if(s, "nu", cfg.svdd_hp.nu);
    get_if(s, "weight_decay", cfg.svdd_hp.weight_decay);
    get_if(s, "warmup_epochs", cfg.svdd_hp.warmup_epochs);
    get_if(s, "epochs", cfg.svdd_hp.epochs);
    get_if(s, "lr", cfg.svdd_hp.lr);
    get_if(s, "batch_size", cfg.svdd_hp.batch_size);
  }

  get_if(j, "seeds", cfg.seeds);
  if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  get_if(j, "out_dir", cfg.out_dir);

  nets::validate_spec(cfg.net);
  svdd::validate_hp(cfg.svdd_hp);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: invalid JSON in " + path + ": " + e.what());
  }
  return parse_config(j);
}

json config_json(const ExperimentConfig& cfg) {
  json d;
  switch (cfg.dataset.source) {
    case DataSource::idx: d["source"] = "idx"; break;
    case DataSource::dices_manifest: d["source"] = "dices_manifest"; break;
    case DataSource::synth_dices: d["source"] = "synth_dices"; break;
  }
  d["images_path"] = cfg.dataset.images_path;
  d["labels_path"] = cfg.dataset.labels_path;
  d["normal_digit"] = cfg.dataset.mnist.normal_digit;
  d["n_train_stacks"] = cfg.dataset.mnist.n_train_stacks;
  d["normal_frac"] = cfg.dataset.mnist.normal_frac;
  d["target_size"] = cfg.dataset.mnist.target_size;
  d["train_manifest"] = cfg.dataset.train_manifest;
  d["test_manifest"] = cfg.dataset.test_manifest;
  d["n_train"] = cfg.dataset.synth.n_train;
  d["n_test"] = cfg.dataset.synth.n_test;
  d["image_size"] = cfg.dataset.synth.image_size;
  d["anomaly_mix"] = cfg.dataset.synth.anomaly_mix;
  d["pixel_noise_sigma"] = cfg.dataset.synth.pixel_noise_sigma;
  d["anomaly_frac"] = cfg.dataset.synth.anomaly_frac;

  json j;
  j["dataset"] = d;
  j["fusion"] = fusion::fusion_tag_str(cfg.fusion);
  j["denoise"] = cfg.denoise;
  j["noise_sigma"] = cfg.noise_sigma;
  j["augment_set"] = cfg.augment_set;
  j["net"] = netspec_json(cfg.net);
  j["pretrain"] = {{"epochs", cfg.pretrain.epochs},
                   {"lr", cfg.pretrain.lr},
                   {"weight_decay", cfg.pretrain.weight_decay},
                   {"batch_size", cfg.pretrain.batch_size}};
  j["svdd"] = {{"nu", cfg.svdd_hp.nu},
               {"weight_decay", cfg.svdd_hp.weight_decay},
               {"warmup_epochs", cfg.svdd_hp.warmup_epochs},
               {"epochs", cfg.svdd_hp.epochs},
               {"lr", cfg.svdd_hp.lr},
               {"batch_size", cfg.svdd_hp.batch_size}};
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = config_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::vector<std::string> preset_names() {
  return {"table2-early", "table2-late", "table2-late-dual", "table3-early-denoise",
          "table5-digit0"};
}

ExperimentConfig preset(const std::string& name, const std::string& scale) {
  if (scale != "desk" && scale != "paper")
    throw std::invalid_argument("unknown scale '" + scale + "', expected desk or paper");
  const bool paper = (scale == "paper");

  ExperimentConfig cfg;
  // Desk scale keeps the published topology but shrinks images and budgets
  // so a CPU run finishes in minutes.
  cfg.net.conv_channels = paper ? std::vector<int>{32, 64, 128, 128} : std::vector<int>{8, 16, 32};
  cfg.net.height = cfg.net.width = paper ? 400 : 28;
  cfg.net.latent_dim = paper ? 640 : 32;
  cfg.pretrain.epochs = paper ? 127 : 20;
  cfg.svdd_hp.epochs = paper ? 80 : 25;
  cfg.svdd_hp.warmup_epochs = paper ? 10 : 5;
  cfg.svdd_hp.nu = 0.4;

  auto dices = [&](svdd::FusionTag tag, bool denoise) {
    cfg.dataset.source = DataSource::synth_dices;
    cfg.dataset.synth.n_train = paper ? 2000 : 500;
    cfg.dataset.synth.n_test = paper ? 133 : 100;
    cfg.dataset.synth.image_size = paper ? 400 : 32;
    cfg.dataset.synth.anomaly_frac = paper ? 60.0 / 133.0 : 0.5;
    cfg.net.height = cfg.net.width = cfg.dataset.synth.image_size;
    cfg.fusion = tag;
    cfg.denoise = denoise;
    if (tag != svdd::FusionTag::early && paper) cfg.net.latent_dim = 392;
  };

  if (name == "table2-early") {
    dices(svdd::FusionTag::early, false);
  } else if (name == "table2-late") {
    dices(svdd::FusionTag::late, false);
  } else if (name == "table2-late-dual") {
    dices(svdd::FusionTag::late_dual, false);
  } else if (name == "table3-early-denoise") {
    dices(svdd::FusionTag::early, true);
  } else if (name == "table5-digit0") {
    cfg.dataset.source = DataSource::idx;
    // default fixture paths, overridable via --config
    cfg.dataset.images_path = "fixtures/digits-images-idx3-ubyte";
    cfg.dataset.labels_path = "fixtures/digits-labels-idx1-ubyte";
    cfg.dataset.mnist.normal_digit = 0;
    cfg.dataset.mnist.n_train_stacks = paper ? 2000 : 500;
    cfg.dataset.mnist.n_test = paper ? 400 : 100;
    cfg.dataset.mnist.normal_frac = 0.10;
    cfg.dataset.mnist.target_size = paper ? 400 : 28;
    cfg.net.height = cfg.net.width = cfg.dataset.mnist.target_size;
    cfg.fusion = svdd::FusionTag::early;
    cfg.denoise = true;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  cfg.pretrain.denoise = cfg.denoise;
  cfg.pretrain.noise_sigma = cfg.noise_sigma;
  nets::validate_spec(cfg.net);
  return cfg;
}

data::TrainTest load_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  switch (cfg.source) {
    case DataSource::idx: {
      const data::IdxData digits = data::load_idx(cfg.images_path, cfg.labels_path);
      return data::synth_multiview_mnist(digits, cfg.mnist, rng);
    }
    case DataSource::dices_manifest: {
      data::TrainTest out;
      out.train = data::load_dices_split(cfg.train_manifest, data::SplitRole::train);
      out.test = data::load_dices_split(cfg.test_manifest, data::SplitRole::test);
      return out;
    }
    case DataSource::synth_dices:
      return data::synth_dices(cfg.synth, rng);
  }
  throw std::logic_error("unreachable data source");
}

}  // namespace mpad::io
