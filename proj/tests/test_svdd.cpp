#include <doctest.h>

#include <cmath>

#include "mpad/svdd.hpp"

using namespace mpad;
using nd::Tensor;

namespace {

// Independent scalar evaluation of the soft-boundary objective.
double loss_oracle(const std::vector<std::vector<double>>& phis,
                   const std::vector<double>& c, double R, double nu) {
  double hinge_sum = 0.0;
  for (const auto& phi : phis) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) d2 += (phi[j] - c[j]) * (phi[j] - c[j]);
    hinge_sum += std::max(0.0, d2 - R * R);
  }
  return R * R + hinge_sum / (nu * static_cast<double>(phis.size()));
}

Tensor embed_tensor(const std::vector<std::vector<double>>& phis) {
  const int b = static_cast<int>(phis.size());
  const int p = static_cast<int>(phis[0].size());
  std::vector<double> flat;
  for (const auto& r : phis) flat.insert(flat.end(), r.begin(), r.end());
  return Tensor::from_data({b, p}, std::move(flat));
}

}  // namespace

TEST_CASE("init_center mean, eps repair, oracle") {
  CHECK(svdd::init_center({{1, 1}, {3, 3}}, 0.1) == std::vector<double>{2, 2});
  CHECK(svdd::init_center({{0, 0}, {0, 0}}, 0.1) == std::vector<double>{0.1, 0.1});
  CHECK(svdd::init_center({{-0.01, 0.05}}, 0.1) == std::vector<double>{-0.1, 0.1});
  CHECK_THROWS(svdd::init_center({}, 0.1));

  Rng rng(1);
  std::vector<std::vector<double>> m(100, std::vector<double>(8));
  std::vector<double> mean(8, 0.0);
  for (auto& row : m)
    for (std::size_t j = 0; j < 8; ++j) {
      row[j] = rng.uniform(-5, 5);
      mean[j] += row[j];
    }
  for (auto& v : mean) v /= 100.0;
  const auto c = svdd::init_center(m, 1e-12);
  for (std::size_t j = 0; j < 8; ++j) CHECK(c[j] == doctest::Approx(mean[j]).epsilon(1e-12));
}

TEST_CASE("svdd_loss worked cases") {
  svdd::SvddHyperParams hp;
  svdd::Hypersphere s;

  // all phi at the center: loss = R^2
  s.center = {1.0, -2.0};
  s.radius = 1.0;
  hp.nu = 0.5;
  Tensor at_center = embed_tensor({{1.0, -2.0}, {1.0, -2.0}});
  CHECK(svdd::svdd_loss(at_center, s, hp).item() == doctest::Approx(1.0).epsilon(1e-15));

  // single point at squared distance 4, R=1, nu=1 -> 1 + 3 = 4
  s.center = {0.0, 0.0};
  s.radius = 1.0;
  hp.nu = 1.0;
  Tensor one = embed_tensor({{2.0, 0.0}});
  CHECK(svdd::svdd_loss(one, s, hp).item() == doctest::Approx(4.0).epsilon(1e-15));

  // dim mismatch
  s.center = {0.0, 0.0, 0.0};
  CHECK_THROWS(svdd::svdd_loss(one, s, hp));
}

TEST_CASE("svdd_loss matches the scalar oracle on random batches") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int b = static_cast<int>(rng.uniform_int(1, 16));
    const int p = static_cast<int>(rng.uniform_int(1, 12));
    std::vector<std::vector<double>> phis(b, std::vector<double>(p));
    for (auto& r : phis)
      for (auto& v : r) v = rng.uniform(-3, 3);
    svdd::Hypersphere s;
    s.center.resize(p);
    for (auto& v : s.center) v = rng.uniform(-2, 2);
    s.radius = rng.uniform(0.0, 2.0);
    svdd::SvddHyperParams hp;
    hp.nu = rng.uniform(0.05, 1.0);
    const double expected = loss_oracle(phis, s.center, s.radius, hp.nu);
    CHECK(svdd::svdd_loss(embed_tensor(phis), s, hp).item() ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("update_radius quantile rule") {
  CHECK(svdd::update_radius({1, 2, 3, 4}, 0.25) ==
        doctest::Approx(std::sqrt(3.25)).epsilon(1e-15));
  CHECK(svdd::update_radius({4, 1, 3, 2}, 0.25) ==
        doctest::Approx(std::sqrt(3.25)).epsilon(1e-15));  // order-independent
  CHECK(svdd::update_radius({9, 4, 16}, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  for (double nu : {0.1, 0.4, 0.9})
    CHECK(svdd::update_radius({7, 7, 7, 7}, nu) == doctest::Approx(std::sqrt(7.0)));
  CHECK_THROWS(svdd::update_radius({}, 0.5));
  CHECK_THROWS(svdd::update_radius({1.0, -0.5}, 0.5));
}

TEST_CASE("anomaly_score and classify") {
  svdd::Hypersphere s{{1.0, 1.0}, 2.0};
  CHECK(svdd::anomaly_score(s, {1.0, 1.0}) == doctest::Approx(-4.0).epsilon(1e-15));
  svdd::Hypersphere zero_r{{0.0, 0.0}, 0.0};
  CHECK(svdd::anomaly_score(zero_r, {0.1, 0.0}) > 0.0);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> c = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    std::vector<double> phi = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double R = rng.uniform(0, 3);
    double d2 = 0;
    for (int j = 0; j < 3; ++j) d2 += (phi[j] - c[j]) * (phi[j] - c[j]);
    CHECK(svdd::anomaly_score({c, R}, phi) == doctest::Approx(d2 - R * R).epsilon(1e-12));
  }

  CHECK(svdd::classify(-0.5) == 0);
  CHECK(svdd::classify(0.5) == 1);
  CHECK(svdd::classify(0.0) == 0);
  CHECK_THROWS(svdd::classify(std::nan("")));
  CHECK_THROWS(svdd::anomaly_score(s, {1.0}));
}

namespace {

// Tiny fixed encoder over 2x2 single-channel inputs so training runs fast.
nets::NetSpec tiny_spec() {
  nets::NetSpec s;
  s.in_channels = 1;
  s.height = s.width = 4;
  s.conv_channels = {4};
  s.kernel = 3;
  s.stride = 2;
  s.padding = 1;
  s.latent_dim = 2;
  return s;
}

std::vector<Tensor> cluster_inputs(int n, Rng& rng) {
  std::vector<Tensor> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(16);
    for (auto& x : v) x = 0.5 + 0.05 * rng.normal();
    out.push_back(Tensor::from_data({1, 1, 4, 4}, std::move(v)));
  }
  return out;
}

}  // namespace

TEST_CASE("train_svdd: nu-property, schedule edge, determinism") {
  const nets::NetSpec spec = tiny_spec();
  for (double nu : {0.1, 0.4}) {
    Rng rng(10);
    nets::Encoder enc(spec, rng);
    std::vector<Tensor> samples = cluster_inputs(60, rng);
    svdd::SvddHyperParams hp;
    hp.nu = nu;
    hp.epochs = 20;
    hp.warmup_epochs = 3;
    hp.lr = 1e-3;
    hp.batch_size = 16;
    Rng train_rng(11);
    svdd::SvddModel model = svdd::train_svdd(std::move(enc), samples, hp, train_rng);

    const auto embs = svdd::encode_all(model.encoder, samples);
    int outside = 0;
    for (const auto& phi : embs)
      if (svdd::anomaly_score(model.sphere, phi) > 0) ++outside;
    const double frac = outside / 60.0;
    CHECK(frac <= nu + 0.05);
    // R is by construction the (1-nu)-quantile of the final distances
    const double rq = svdd::update_radius(
        svdd::squared_distances(embs, model.sphere.center), nu);
    CHECK(model.sphere.radius == doctest::Approx(rq).epsilon(1e-12));
  }

  // k = N: R stays at its initial quantile value
  {
    Rng rng(12);
    nets::Encoder enc(spec, rng);
    std::vector<Tensor> samples = cluster_inputs(20, rng);
    svdd::SvddHyperParams hp;
    hp.epochs = 3;
    hp.warmup_epochs = 3;
    hp.lr = 1e-4;  // weights move, but R stays frozen throughout warm-up
    hp.batch_size = 8;
    nets::Encoder enc_copy = nets::transfer_encoder(enc);
    Rng train_rng(13);
    svdd::SvddModel model = svdd::train_svdd(std::move(enc), samples, hp, train_rng);
    const auto embs0 = svdd::encode_all(enc_copy, samples);
    const auto c = svdd::init_center(embs0);
    const double r0 = svdd::update_radius(svdd::squared_distances(embs0, c), hp.nu);
    CHECK(model.sphere.radius == doctest::Approx(r0).epsilon(1e-12));
  }

  // determinism
  auto run = [&spec]() {
    Rng rng(14);
    nets::Encoder enc(spec, rng);
    std::vector<Tensor> samples = cluster_inputs(20, rng);
    svdd::SvddHyperParams hp;
    hp.epochs = 6;
    hp.warmup_epochs = 2;
    hp.batch_size = 8;
    Rng train_rng(15);
    return svdd::train_svdd(std::move(enc), samples, hp, train_rng).sphere.radius;
  };
  const double r1 = run(), r2 = run();
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("center never identically zero after initialization") {
  const auto c = svdd::init_center({{0, 0, 0}, {0, 0, 0}}, 0.1);
  for (double v : c) CHECK(v != 0.0);
}
