#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "mpad/dataset.hpp"
#include "mpad/fusion.hpp"
#include "mpad/nets.hpp"
#include "mpad/svdd.hpp"

namespace mpad::io {

enum class DataSource { idx, dices_manifest, synth_dices };

struct DatasetConfig {
  DataSource source = DataSource::synth_dices;
  // idx source
  std::string images_path, labels_path;
  data::MultiviewMnistConfig mnist;
  // dices_manifest source
  std::string train_manifest, test_manifest;
  // synth_dices source
  data::SynthDicesConfig synth;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  svdd::FusionTag fusion = svdd::FusionTag::early;
  bool denoise = false;
  double noise_sigma = 0.1;
  std::string augment_set = "none";  // none|all|no_erase|no_constituents|no_geometry
  nets::NetSpec net;
  fusion::PretrainConfig pretrain;
  svdd::SvddHyperParams svdd_hp;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string out_dir = "out";
};

// Strict parse: unknown keys anywhere are rejected; every field has a
// documented default.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_json(const ExperimentConfig& cfg);

// FNV-1a over the canonical JSON dump; recorded in every artifact.
std::string config_hash(const ExperimentConfig& cfg);

// Named paper-parity presets ("table3-early-denoise", "table5-digit0", ...)
// at desk or paper scale.
ExperimentConfig preset(const std::string& name, const std::string& scale);
std::vector<std::string> preset_names();

nlohmann::json netspec_json(const nets::NetSpec& spec);
nets::NetSpec netspec_from_json(const nlohmann::json& j);

// Loads (or synthesizes) the train/test splits named by the config.
data::TrainTest load_dataset(const DatasetConfig& cfg, std::uint64_t seed);

}  // namespace mpad::io
