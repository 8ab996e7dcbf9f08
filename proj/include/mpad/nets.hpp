#pragma once

#include <string>
#include <vector>

#include "mpad/tensor.hpp"

namespace mpad::nets {

using nd::NamedParams;
using nd::Tensor;

// Topology of the convolutional autoencoder. The decoder is always the
// exact mirror of the encoder; per-layer output padding is computed so the
// reconstruction lands back on input_shape.
struct NetSpec {
  int in_channels = 2;
  int height = 28;
  int width = 28;
  std::vector<int> conv_channels = {8, 16, 32};
  int kernel = 5;
  int stride = 2;
  int padding = 2;
  int latent_dim = 32;
  double leaky_slope = 0.1;

  bool operator==(const NetSpec&) const = default;
};

// Per-layer spatial sizes of the encoder, including the input size.
// Throws if any conv layer collapses the spatial extent below 1x1.
std::vector<std::pair<int, int>> encoder_sizes(const NetSpec& spec);

void validate_spec(const NetSpec& spec);

// Bias-free convolutional encoder: conv+leaky_relu per layer, then one fc
// to the latent space (linear output, the hypersphere lives there).
class Encoder {
 public:
  Encoder() = default;
  Encoder(const NetSpec& spec, Rng& rng);
  Encoder(const NetSpec& spec, NamedParams params);

  // x: (N, C, H, W) -> (N, latent_dim)
  Tensor forward(const Tensor& x) const;

  const NetSpec& spec() const { return spec_; }
  NamedParams& params() { return params_; }
  const NamedParams& params() const { return params_; }

 private:
  NetSpec spec_;
  NamedParams params_;  // conv1..convL, fc
};

// Mirror decoder: fc from latent, reshape, tconv+leaky_relu per layer with
// a linear last layer. name_prefix distinguishes the dual-decoder variant.
class Decoder {
 public:
  Decoder() = default;
  Decoder(const NetSpec& spec, Rng& rng, const std::string& name_prefix = "dec");
  Decoder(const NetSpec& spec, NamedParams params, const std::string& name_prefix = "dec");

  // z: (N, latent_dim) -> (N, C, H, W)
  Tensor forward(const Tensor& z) const;

  NamedParams& params() { return params_; }
  const NamedParams& params() const { return params_; }
  const std::string& name_prefix() const { return prefix_; }

 private:
  NetSpec spec_;
  NamedParams params_;
  std::string prefix_;
};

struct Cae {
  Encoder encoder;
  Decoder decoder;
};

Cae build_cae(const NetSpec& spec, Rng& rng);

// mse(batch, decoder(encoder(batch))). For the denoising variant pass the
// corrupted batch as `input` and the clean batch as `target`.
Tensor cae_loss(const Encoder& enc, const Decoder& dec, const Tensor& batch);
Tensor cae_loss(const Encoder& enc, const Decoder& dec, const Tensor& input,
                const Tensor& target);

// Additive Gaussian corruption; returns a detached constant tensor. The
// caller feeds the corrupted batch to the encoder and keeps the clean batch
// as the reconstruction target.
Tensor dae_corrupt(const Tensor& batch, double noise_sigma, Rng& rng);

// Deep copy of the encoder weights; the decoder is discarded.
Encoder transfer_encoder(const Encoder& pretrained);

}  // namespace mpad::nets
