#include <doctest.h>

#include <cmath>

#include "mpad/nets.hpp"

using namespace mpad;
using nd::Tensor;

namespace {
Tensor random_batch(const nets::NetSpec& s, int n, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(n) * s.in_channels * s.height * s.width);
  for (auto& x : v) x = rng.uniform();
  return Tensor::from_data({n, s.in_channels, s.height, s.width}, std::move(v));
}
}  // namespace

TEST_CASE("cae shapes for the default topology") {
  nets::NetSpec spec;  // (2,28,28), [8,16,32], k5 s2 p2, latent 32
  Rng rng(1);
  nets::Cae cae = nets::build_cae(spec, rng);
  Tensor x = random_batch(spec, 2, rng);
  Tensor z = cae.encoder.forward(x);
  CHECK(z.shape() == nd::Shape{2, 32});
  Tensor r = cae.decoder.forward(z);
  CHECK(r.shape() == x.shape());
}

TEST_CASE("large paper-style topology is constructible") {
  nets::NetSpec spec;
  spec.in_channels = 2;
  spec.height = spec.width = 400;
  spec.conv_channels = {32, 64, 128, 128};
  spec.latent_dim = 640;
  CHECK_NOTHROW(nets::validate_spec(spec));
  const auto sizes = nets::encoder_sizes(spec);
  CHECK(sizes.size() == 5);
  CHECK(sizes.back().first >= 1);
}

TEST_CASE("spec whose spatial size collapses is rejected") {
  nets::NetSpec spec;
  spec.height = spec.width = 4;
  spec.kernel = 3;
  spec.padding = 0;
  spec.conv_channels = {4, 4};  // 4 -> 1 -> kernel no longer fits
  CHECK_THROWS(nets::validate_spec(spec));
}

TEST_CASE("no parameter is a bias (structural absence)") {
  nets::NetSpec spec;
  Rng rng(2);
  nets::Cae cae = nets::build_cae(spec, rng);
  auto check_params = [](const nd::NamedParams& ps) {
    for (const auto& [name, t] : ps) {
      CHECK(name.find("bias") == std::string::npos);
      // weights are matrices or 4-d kernels, never 1-d vectors
      CHECK(t.shape().size() >= 2);
    }
  };
  check_params(cae.encoder.params());
  check_params(cae.decoder.params());
}

TEST_CASE("cae loss non-negative and zero for an identity pair") {
  nets::NetSpec spec;
  spec.in_channels = 1;
  spec.height = spec.width = 8;
  spec.conv_channels = {4};
  spec.latent_dim = 8;
  Rng rng(3);
  nets::Cae cae = nets::build_cae(spec, rng);
  Tensor x = random_batch(spec, 3, rng);
  CHECK(nets::cae_loss(cae.encoder, cae.decoder, x).item() >= 0.0);
  // target == reconstruction -> exactly zero
  Tensor recon = cae.decoder.forward(cae.encoder.forward(x));
  CHECK(nd::mse(recon, recon).item() == 0.0);
}

TEST_CASE("overfitting a single repeated image halves the loss") {
  nets::NetSpec spec;
  spec.in_channels = 1;
  spec.height = spec.width = 12;
  spec.conv_channels = {4, 8};
  spec.latent_dim = 16;
  Rng rng(4);
  nets::Cae cae = nets::build_cae(spec, rng);
  Tensor x = random_batch(spec, 4, rng);

  nd::NamedParams all = cae.encoder.params();
  for (auto& p : cae.decoder.params()) all.push_back(p);
  nd::AdamState st;
  st.lr = 5e-3;
  const double initial = nets::cae_loss(cae.encoder, cae.decoder, x).item();
  double final_loss = initial;
  for (int epoch = 0; epoch < 60; ++epoch) {
    nd::zero_grads(all);
    Tensor loss = nets::cae_loss(cae.encoder, cae.decoder, x);
    nd::backward(loss);
    nd::adam_step(all, st, 0.0);
    final_loss = loss.item();
  }
  CHECK(final_loss < initial / 2);
}

TEST_CASE("dae corruption moments and edge cases") {
  Rng rng(5);
  Tensor x = Tensor::full({1, 1, 40, 40}, 0.5);
  Tensor same = nets::dae_corrupt(x, 0.0, rng);
  CHECK(same.data() == x.data());

  Tensor noisy = nets::dae_corrupt(x, 0.1, rng);
  double mean = 0, var = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) mean += noisy.data()[i] - x.data()[i];
  mean /= static_cast<double>(x.numel());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double d = noisy.data()[i] - x.data()[i] - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / static_cast<double>(x.numel()));
  CHECK(stddev == doctest::Approx(0.1).epsilon(0.10));

  Rng r1(6), r2(6);
  CHECK(nets::dae_corrupt(x, 0.1, r1).data() == nets::dae_corrupt(x, 0.1, r2).data());
}

TEST_CASE("denoising loss target carries no gradient") {
  nets::NetSpec spec;
  spec.in_channels = 1;
  spec.height = spec.width = 8;
  spec.conv_channels = {4};
  spec.latent_dim = 8;
  Rng rng(7);
  nets::Cae cae = nets::build_cae(spec, rng);
  Tensor clean = random_batch(spec, 2, rng);
  Tensor clean_leaf = clean.detach_copy(true);
  Tensor corrupted = nets::dae_corrupt(clean_leaf, 0.1, rng);
  Tensor loss = nets::cae_loss(cae.encoder, cae.decoder, corrupted, clean_leaf);
  nd::backward(loss);
  // target participates in the loss, so its gradient is well-defined and
  // flows; the corrupted input is detached so nothing reaches the clean
  // image through the encoder path. Check the encoder received gradient.
  for (const auto& [name, t] : cae.encoder.params()) {
    double norm = 0;
    for (double g : t.grad()) norm += g * g;
    CHECK(norm > 0.0);
  }
}

TEST_CASE("transfer_encoder deep-copies and preserves outputs") {
  nets::NetSpec spec;
  spec.in_channels = 1;
  spec.height = spec.width = 8;
  spec.conv_channels = {4};
  spec.latent_dim = 8;
  Rng rng(8);
  nets::Cae cae = nets::build_cae(spec, rng);
  Tensor x = random_batch(spec, 1, rng);
  const std::vector<double> before = cae.encoder.forward(x).data();

  nets::Encoder copy = nets::transfer_encoder(cae.encoder);
  CHECK(copy.params().size() == cae.encoder.params().size());
  CHECK(copy.forward(x).data() == before);

  // perturb the copy; original must be unchanged
  copy.params()[0].second.mutable_data()[0] += 1.0;
  CHECK(cae.encoder.forward(x).data() == before);
}
