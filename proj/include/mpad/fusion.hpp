#pragma once

#include <memory>
#include <vector>

#include "mpad/dataset.hpp"
#include "mpad/nets.hpp"
#include "mpad/svdd.hpp"

namespace mpad::fusion {

using svdd::FusionTag;

std::string fusion_tag_str(FusionTag tag);
FusionTag fusion_tag_from_str(const std::string& s);

struct PretrainConfig {
  int epochs = 20;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  int batch_size = 32;
  bool denoise = false;
  double noise_sigma = 0.1;
};

// First-stage result. Late fusion w/ dual decoders keeps one decoder per
// view; the other strategies keep exactly one.
struct Pretrained {
  nets::Encoder encoder;
  std::vector<nets::Decoder> decoders;
  std::vector<double> epoch_losses;
};

// Normalizes a strategy's NetSpec: early fusion consumes K-channel stacks,
// the late variants consume single-channel views.
nets::NetSpec spec_for_strategy(FusionTag tag, const nets::NetSpec& base, int k_views);

Pretrained pretrain(FusionTag tag, const data::DatasetSplit& train,
                    const nets::NetSpec& base_spec, const PretrainConfig& cfg, Rng& rng);

// Uniform mean of K latent vectors.
std::vector<double> fuse_embeddings(const std::vector<std::vector<double>>& phis);

// Second-stage inputs: channel stacks for early fusion, individual views
// for the late variants.
std::vector<nd::Tensor> svdd_inputs(FusionTag tag, const data::DatasetSplit& split);

// One fused anomaly score per object regardless of strategy.
double score_sample(const svdd::SvddModel& model, const data::ViewStack& sample);

std::vector<double> score_split(const svdd::SvddModel& model,
                                const data::DatasetSplit& split);

// Full two-stage pipeline: pretrain, transfer the encoder, run the SVDD
// stage.
svdd::SvddModel train_pipeline(FusionTag tag, const data::DatasetSplit& train,
                               const nets::NetSpec& base_spec, const PretrainConfig& pre_cfg,
                               const svdd::SvddHyperParams& hp, Rng& rng);

}  // namespace mpad::fusion
