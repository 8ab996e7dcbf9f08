#include "mpad/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mpad::fusion {

std::string fusion_tag_str(FusionTag tag) {
  switch (tag) {
    case FusionTag::early: return "early";
    case FusionTag::late: return "late";
    case FusionTag::late_dual: return "late_dual";
  }
  throw std::logic_error("unreachable fusion tag");
}

FusionTag fusion_tag_from_str(const std::string& s) {
  if (s == "early") return FusionTag::early;
  if (s == "late") return FusionTag::late;
  if (s == "late_dual") return FusionTag::late_dual;
  throw std::invalid_argument("unknown fusion strategy: '" + s + "'");
}

nets::NetSpec spec_for_strategy(FusionTag tag, const nets::NetSpec& base, int k_views) {
  nets::NetSpec spec = base;
  spec.in_channels = (tag == FusionTag::early) ? k_views : 1;
  nets::validate_spec(spec);
  return spec;
}

namespace {

void require_one_class(const data::DatasetSplit& train) {
  for (const auto& s : train.samples)
    if (s.label != 0)
      throw std::invalid_argument("pretrain: anomalous sample '" + s.id +
                                  "' in training data violates the one-class contract");
}

int view_count(const data::DatasetSplit& split) {
  if (split.samples.empty()) throw std::invalid_argument("empty dataset");
  const std::size_t k = split.samples.front().views.size();
  for (const auto& s : split.samples)
    if (s.views.size() != k)
      throw std::invalid_argument("inconsistent view counts across samples");
  return static_cast<int>(k);
}

nd::Tensor gather_batch(const std::vector<nd::Tensor>& samples,
                        const std::vector<std::size_t>& idx) {
  nd::Shape bs = samples[idx.front()].shape();
  bs[0] = static_cast<int>(idx.size());
  std::vector<double> data;
  data.reserve(nd::shape_numel(bs));
  for (std::size_t i : idx) {
    const auto& d = samples[i].data();
    data.insert(data.end(), d.begin(), d.end());
  }
  return nd::Tensor::from_data(bs, std::move(data));
}

void shuffle_indices(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i-- > 1;) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(order[i], order[j]);
  }
}

}  // namespace

Pretrained pretrain(FusionTag tag, const data::DatasetSplit& train,
                    const nets::NetSpec& base_spec, const PretrainConfig& cfg, Rng& rng) {
  require_one_class(train);
  if (cfg.epochs < 1 || cfg.lr <= 0.0 || cfg.batch_size < 1)
    throw std::invalid_argument("pretrain: bad training config");
  const int k = view_count(train);
  const nets::NetSpec spec = spec_for_strategy(tag, base_spec, k);

  Pretrained out;
  out.encoder = nets::Encoder(spec, rng);
  const int n_decoders = (tag == FusionTag::late_dual) ? k : 1;
  for (int d = 0; d < n_decoders; ++d)
    out.decoders.emplace_back(spec, rng, n_decoders == 1 ? "dec" : "dec" + std::to_string(d));

  // Per-view sample tensors: early fusion uses one K-channel "view".
  std::vector<std::vector<nd::Tensor>> views;
  if (tag == FusionTag::early) {
    views.resize(1);
    for (const auto& s : train.samples) views[0].push_back(data::stack_views(s));
  } else {
    views.resize(k);
    for (const auto& s : train.samples)
      for (int v = 0; v < k; ++v) views[v].push_back(data::view_tensor(s, v));
  }

  nd::NamedParams all_params = out.encoder.params();
  for (auto& dec : out.decoders)
    for (auto& p : dec.params()) all_params.push_back(p);

  nd::AdamState opt;
  opt.lr = cfg.lr;

  std::vector<std::size_t> order(train.samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);

      nd::Tensor loss;
      if (tag == FusionTag::late) {
        // All views are independent samples through the single CAE.
        std::vector<nd::Tensor> losses;
        for (int v = 0; v < k; ++v) {
          nd::Tensor clean = gather_batch(views[v], idx);
          nd::Tensor input = cfg.denoise ? nets::dae_corrupt(clean, cfg.noise_sigma, rng) : clean;
          losses.push_back(nets::cae_loss(out.encoder, out.decoders[0], input, clean));
        }
        loss = losses[0];
        for (std::size_t v = 1; v < losses.size(); ++v) loss = nd::add(loss, losses[v]);
        loss = nd::scale(loss, 1.0 / static_cast<double>(losses.size()));
      } else if (tag == FusionTag::late_dual) {
        // Shared encoder, view v routed to decoder v; mean of per-view losses.
        std::vector<nd::Tensor> losses;
        for (int v = 0; v < k; ++v) {
          nd::Tensor clean = gather_batch(views[v], idx);
          nd::Tensor input = cfg.denoise ? nets::dae_corrupt(clean, cfg.noise_sigma, rng) : clean;
          losses.push_back(nets::cae_loss(out.encoder, out.decoders[v], input, clean));
        }
        loss = losses[0];
        for (std::size_t v = 1; v < losses.size(); ++v) loss = nd::add(loss, losses[v]);
        loss = nd::scale(loss, 1.0 / static_cast<double>(losses.size()));
      } else {
        nd::Tensor clean = gather_batch(views[0], idx);
        nd::Tensor input = cfg.denoise ? nets::dae_corrupt(clean, cfg.noise_sigma, rng) : clean;
        loss = nets::cae_loss(out.encoder, out.decoders[0], input, clean);
      }

      if (!std::isfinite(loss.item()))
        throw std::runtime_error("pretrain: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch + 1));
      nd::zero_grads(all_params);
      nd::backward(loss);
      nd::adam_step(all_params, opt, cfg.weight_decay);
      epoch_loss += loss.item();
      ++n_batches;
    }
    out.epoch_losses.push_back(epoch_loss / static_cast<double>(n_batches));
  }
  return out;
}

std::vector<double> fuse_embeddings(const std::vector<std::vector<double>>& phis) {
  if (phis.empty()) throw std::invalid_argument("fuse_embeddings: empty list");
  const std::size_t p = phis.front().size();
  std::vector<double> out(p, 0.0);
  for (const auto& phi : phis) {
    if (phi.size() != p) throw std::invalid_argument("fuse_embeddings: mixed vector lengths");
    for (std::size_t j = 0; j < p; ++j) out[j] += phi[j];
  }
  for (double& v : out) v /= static_cast<double>(phis.size());
  return out;
}

std::vector<nd::Tensor> svdd_inputs(FusionTag tag, const data::DatasetSplit& split) {
  std::vector<nd::Tensor> out;
  if (tag == FusionTag::early) {
    for (const auto& s : split.samples) out.push_back(data::stack_views(s));
  } else {
    // Each view forwarded on its own in the second stage.
    for (const auto& s : split.samples)
      for (std::size_t v = 0; v < s.views.size(); ++v)
        out.push_back(data::view_tensor(s, v));
  }
  return out;
}

double score_sample(const svdd::SvddModel& model, const data::ViewStack& sample) {
  const nets::NetSpec& spec = model.encoder.spec();
  if (model.fusion_tag == FusionTag::early) {
    if (static_cast<int>(sample.views.size()) != spec.in_channels)
      throw std::invalid_argument("score_sample: model expects " +
                                  std::to_string(spec.in_channels) + " views, sample has " +
                                  std::to_string(sample.views.size()));
    nd::Tensor z = model.encoder.forward(data::stack_views(sample));
    return svdd::anomaly_score(model, z.data());
  }
  // Late variants: encode each view, average, score once. A single-view
  // sample is allowed (single-perspective scoring).
  std::vector<std::vector<double>> phis;
  for (std::size_t v = 0; v < sample.views.size(); ++v) {
    nd::Tensor z = model.encoder.forward(data::view_tensor(sample, v));
    phis.push_back(z.data());
  }
  return svdd::anomaly_score(model, fuse_embeddings(phis));
}

std::vector<double> score_split(const svdd::SvddModel& model,
                                const data::DatasetSplit& split) {
  std::vector<double> out;
  out.reserve(split.samples.size());
  for (const auto& s : split.samples) out.push_back(score_sample(model, s));
  return out;
}

svdd::SvddModel train_pipeline(FusionTag tag, const data::DatasetSplit& train,
                               const nets::NetSpec& base_spec, const PretrainConfig& pre_cfg,
                               const svdd::SvddHyperParams& hp, Rng& rng) {
  Pretrained pre = pretrain(tag, train, base_spec, pre_cfg, rng);
  nets::Encoder encoder = nets::transfer_encoder(pre.encoder);
  return svdd::train_svdd(std::move(encoder), svdd_inputs(tag, train), hp, rng, tag);
}

}  // namespace mpad::fusion
