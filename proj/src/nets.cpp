#include "mpad/nets.hpp"

#include <stdexcept>

namespace mpad::nets {

std::vector<std::pair<int, int>> encoder_sizes(const NetSpec& spec) {
  std::vector<std::pair<int, int>> sizes;
  sizes.emplace_back(spec.height, spec.width);
  int h = spec.height, w = spec.width;
  for (std::size_t l = 0; l < spec.conv_channels.size(); ++l) {
    h = (h + 2 * spec.padding - spec.kernel) / spec.stride + 1;
    w = (w + 2 * spec.padding - spec.kernel) / spec.stride + 1;
    if (h < 1 || w < 1)
      throw std::invalid_argument("NetSpec: spatial size collapses below 1x1 at conv layer " +
                                  std::to_string(l + 1));
    sizes.emplace_back(h, w);
  }
  return sizes;
}

void validate_spec(const NetSpec& spec) {
  if (spec.in_channels < 1) throw std::invalid_argument("NetSpec: in_channels must be >= 1");
  if (spec.latent_dim < 1) throw std::invalid_argument("NetSpec: latent_dim must be >= 1");
  if (spec.conv_channels.empty())
    throw std::invalid_argument("NetSpec: need at least one conv layer");
  for (int c : spec.conv_channels)
    if (c < 1) throw std::invalid_argument("NetSpec: conv channel counts must be >= 1");
  if (spec.stride < 1 || spec.padding < 0 || spec.kernel < 1)
    throw std::invalid_argument("NetSpec: bad kernel/stride/padding");
  if (spec.leaky_slope <= 0.0 || spec.leaky_slope >= 1.0)
    throw std::invalid_argument("NetSpec: leaky_slope must be in (0,1)");
  encoder_sizes(spec);
}

namespace {

std::string conv_name(std::size_t l) { return "enc.conv" + std::to_string(l + 1); }

Tensor find_param(const NamedParams& params, const std::string& name) {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw std::invalid_argument("missing parameter '" + name + "'");
}

}  // namespace

Encoder::Encoder(const NetSpec& spec, Rng& rng) : spec_(spec) {
  validate_spec(spec);
  auto sizes = encoder_sizes(spec);
  int in_ch = spec.in_channels;
  for (std::size_t l = 0; l < spec.conv_channels.size(); ++l) {
    const int out_ch = spec.conv_channels[l];
    params_.emplace_back(conv_name(l),
                         nd::xavier_init({out_ch, in_ch, spec.kernel, spec.kernel}, rng));
    in_ch = out_ch;
  }
  const auto [h, w] = sizes.back();
  const int flat = in_ch * h * w;
  params_.emplace_back("enc.fc", nd::xavier_init({flat, spec.latent_dim}, rng));
}

Encoder::Encoder(const NetSpec& spec, NamedParams params)
    : spec_(spec), params_(std::move(params)) {
  validate_spec(spec);
  for (std::size_t l = 0; l < spec.conv_channels.size(); ++l) find_param(params_, conv_name(l));
  find_param(params_, "enc.fc");
}

Tensor Encoder::forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t l = 0; l < spec_.conv_channels.size(); ++l) {
    h = nd::conv2d(h, find_param(params_, conv_name(l)), spec_.stride, spec_.padding);
    h = nd::leaky_relu(h, spec_.leaky_slope);
  }
  const auto& s = h.shape();
  h = nd::reshape(h, {s[0], s[1] * s[2] * s[3]});
  return nd::dense(h, find_param(params_, "enc.fc"));
}

Decoder::Decoder(const NetSpec& spec, Rng& rng, const std::string& name_prefix)
    : spec_(spec), prefix_(name_prefix) {
  validate_spec(spec);
  auto sizes = encoder_sizes(spec);
  const auto [h, w] = sizes.back();
  const int bottom_ch = spec.conv_channels.back();
  params_.emplace_back(prefix_ + ".fc",
                       nd::xavier_init({spec.latent_dim, bottom_ch * h * w}, rng));
  // tconv layers walk the channel list backwards; weight layout (O, I, K, K)
  // where O is the layer's input channel count.
  for (std::size_t l = spec.conv_channels.size(); l-- > 0;) {
    const int in_ch = spec.conv_channels[l];
    const int out_ch = (l == 0) ? spec.in_channels : spec.conv_channels[l - 1];
    params_.emplace_back(prefix_ + ".tconv" + std::to_string(spec.conv_channels.size() - l),
                         nd::xavier_init({in_ch, out_ch, spec.kernel, spec.kernel}, rng));
  }
}

Decoder::Decoder(const NetSpec& spec, NamedParams params, const std::string& name_prefix)
    : spec_(spec), params_(std::move(params)), prefix_(name_prefix) {
  validate_spec(spec);
}

Tensor Decoder::forward(const Tensor& z) const {
  auto sizes = encoder_sizes(spec_);
  const auto [bh, bw] = sizes.back();
  const int bottom_ch = spec_.conv_channels.back();
  Tensor h = nd::dense(z, find_param(params_, prefix_ + ".fc"));
  h = nd::leaky_relu(h, spec_.leaky_slope);
  h = nd::reshape(h, {z.shape()[0], bottom_ch, bh, bw});
  const std::size_t L = spec_.conv_channels.size();
  for (std::size_t l = L; l-- > 0;) {
    // Target size is the encoder's input size for this layer; out_pad
    // absorbs the floor in the conv shape law.
    const auto [th, tw] = sizes[l];
    const auto& s = h.shape();
    const int base_h = (s[2] - 1) * spec_.stride - 2 * spec_.padding + spec_.kernel;
    const int out_pad = th - base_h;
    if (out_pad < 0 || out_pad >= spec_.stride)
      throw std::runtime_error("Decoder: cannot mirror encoder size " + std::to_string(th));
    (void)tw;
    h = nd::tconv2d(h, find_param(params_, prefix_ + ".tconv" + std::to_string(L - l)),
                    spec_.stride, spec_.padding, out_pad);
    if (l > 0) h = nd::leaky_relu(h, spec_.leaky_slope);
  }
  return h;
}

Cae build_cae(const NetSpec& spec, Rng& rng) {
  Encoder enc(spec, rng);
  Decoder dec(spec, rng);
  return {std::move(enc), std::move(dec)};
}

Tensor cae_loss(const Encoder& enc, const Decoder& dec, const Tensor& batch) {
  return cae_loss(enc, dec, batch, batch);
}

Tensor cae_loss(const Encoder& enc, const Decoder& dec, const Tensor& input,
                const Tensor& target) {
  return nd::mse(target, dec.forward(enc.forward(input)));
}

Tensor dae_corrupt(const Tensor& batch, double noise_sigma, Rng& rng) {
  if (noise_sigma < 0.0) throw std::invalid_argument("dae_corrupt: sigma must be >= 0");
  Tensor out = batch.detach_copy(false);
  if (noise_sigma == 0.0) return out;
  for (double& v : out.mutable_data()) v += rng.normal(0.0, noise_sigma);
  return out;
}

Encoder transfer_encoder(const Encoder& pretrained) {
  NamedParams copy;
  for (const auto& [name, t] : pretrained.params())
    copy.emplace_back(name, t.detach_copy(true));
  return Encoder(pretrained.spec(), std::move(copy));
}

}  // namespace mpad::nets
