#include "mpad/svdd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mpad::svdd {

void validate_hp(const SvddHyperParams& hp) {
  if (hp.nu <= 0.0 || hp.nu > 1.0) throw std::invalid_argument("nu must be in (0,1]");
  if (hp.weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  if (hp.warmup_epochs < 0 || hp.epochs < 1 || hp.warmup_epochs > hp.epochs)
    throw std::invalid_argument("need 0 <= warmup_epochs <= epochs and epochs >= 1");
  if (hp.lr <= 0.0 || hp.batch_size < 1)
    throw std::invalid_argument("lr and batch_size must be positive");
}

std::vector<double> init_center(const std::vector<std::vector<double>>& embeddings,
                                double eps) {
  if (embeddings.empty()) throw std::invalid_argument("init_center: empty embedding set");
  if (eps <= 0.0) throw std::invalid_argument("init_center: eps must be > 0");
  const std::size_t p = embeddings.front().size();
  std::vector<double> c(p, 0.0);
  for (const auto& e : embeddings) {
    if (e.size() != p) throw std::invalid_argument("init_center: ragged embedding matrix");
    for (std::size_t j = 0; j < p; ++j) c[j] += e[j];
  }
  for (double& v : c) v /= static_cast<double>(embeddings.size());
  // Collapse guard: keep every coordinate away from zero.
  for (double& v : c) {
    if (std::abs(v) < eps) v = (v < 0.0) ? -eps : eps;
  }
  return c;
}

Tensor svdd_loss(const Tensor& embeddings, const Hypersphere& sphere,
                 const SvddHyperParams& hp) {
  const auto& s = embeddings.shape();
  if (s.size() != 2) throw std::invalid_argument("svdd_loss: embeddings must be (b, p)");
  if (static_cast<std::size_t>(s[1]) != sphere.center.size())
    throw std::invalid_argument("svdd_loss: embedding dim " + std::to_string(s[1]) +
                                " != center dim " + std::to_string(sphere.center.size()));
  const int b = s[0];
  const double r2 = sphere.radius * sphere.radius;
  Tensor diff = nd::sub_rowvec(embeddings, sphere.center);
  Tensor dist_sq = nd::row_sum(nd::mul(diff, diff));
  Tensor hinge = nd::relu(nd::add_scalar(dist_sq, -r2));
  Tensor mean_hinge = nd::scale(nd::sum_all(hinge), 1.0 / (hp.nu * b));
  return nd::add_scalar(mean_hinge, r2);
}

double update_radius(std::vector<double> distances_sq, double nu) {
  if (distances_sq.empty()) throw std::invalid_argument("update_radius: empty distances");
  for (double d : distances_sq)
    if (d < 0.0) throw std::runtime_error("update_radius: negative squared distance");
  std::sort(distances_sq.begin(), distances_sq.end());
  const double q = 1.0 - nu;
  const double pos = q * static_cast<double>(distances_sq.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, distances_sq.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  const double r2 = distances_sq[lo] + frac * (distances_sq[hi] - distances_sq[lo]);
  return std::sqrt(r2);
}

std::vector<double> squared_distances(const std::vector<std::vector<double>>& embeddings,
                                      const std::vector<double>& center) {
  std::vector<double> out;
  out.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    if (e.size() != center.size())
      throw std::invalid_argument("squared_distances: dim mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      const double d = e[j] - center[j];
      acc += d * d;
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<std::vector<double>> encode_all(const nets::Encoder& encoder,
                                            const std::vector<Tensor>& samples,
                                            int batch_size) {
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(samples.size(), start + batch_size);
    // Stack the slice into one (b, C, H, W) constant tensor.
    const auto& s0 = samples[start].shape();
    nd::Shape bs = s0;
    bs[0] = static_cast<int>(end - start);
    std::vector<double> data;
    data.reserve(nd::shape_numel(bs));
    for (std::size_t i = start; i < end; ++i) {
      const auto& d = samples[i].data();
      data.insert(data.end(), d.begin(), d.end());
    }
    Tensor batch = Tensor::from_data(bs, std::move(data));
    Tensor z = encoder.forward(batch);
    const int p = z.shape()[1];
    for (int r = 0; r < z.shape()[0]; ++r)
      out.emplace_back(z.data().begin() + static_cast<std::size_t>(r) * p,
                       z.data().begin() + static_cast<std::size_t>(r + 1) * p);
  }
  return out;
}

namespace {

Tensor make_batch(const std::vector<Tensor>& samples, const std::vector<std::size_t>& idx) {
  const auto& s0 = samples[idx.front()].shape();
  nd::Shape bs = s0;
  bs[0] = static_cast<int>(idx.size());
  std::vector<double> data;
  data.reserve(nd::shape_numel(bs));
  for (std::size_t i : idx) {
    const auto& d = samples[i].data();
    data.insert(data.end(), d.begin(), d.end());
  }
  return Tensor::from_data(bs, std::move(data));
}

}  // namespace

SvddModel train_svdd(nets::Encoder encoder, const std::vector<Tensor>& samples,
                     const SvddHyperParams& hp, Rng& rng, FusionTag tag) {
  validate_hp(hp);
  if (samples.empty()) throw std::invalid_argument("train_svdd: empty training set");

  Hypersphere sphere;
  sphere.center = init_center(encode_all(encoder, samples), 0.1);
  sphere.radius =
      update_radius(squared_distances(encode_all(encoder, samples), sphere.center), hp.nu);

  nd::AdamState opt;
  opt.lr = hp.lr;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    // Fisher-Yates with the run RNG keeps the schedule seed-deterministic.
    for (std::size_t i = order.size(); i-- > 1;) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
      Tensor batch = make_batch(samples, idx);
      Tensor z = encoder.forward(batch);
      Tensor loss = svdd_loss(z, sphere, hp);
      if (!std::isfinite(loss.item()))
        throw std::runtime_error("train_svdd: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));
      nd::zero_grads(encoder.params());
      nd::backward(loss);
      nd::adam_step(encoder.params(), opt, hp.weight_decay);
    }
    if (epoch > hp.warmup_epochs) {
      sphere.radius = update_radius(
          squared_distances(encode_all(encoder, samples), sphere.center), hp.nu);
    }
  }

  SvddModel model;
  model.encoder = std::move(encoder);
  model.sphere = std::move(sphere);
  model.hp = hp;
  model.fusion_tag = tag;
  return model;
}

double anomaly_score(const Hypersphere& sphere, const std::vector<double>& phi) {
  if (phi.size() != sphere.center.size())
    throw std::invalid_argument("anomaly_score: embedding dim " + std::to_string(phi.size()) +
                                " != center dim " + std::to_string(sphere.center.size()));
  double acc = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double d = phi[j] - sphere.center[j];
    acc += d * d;
  }
  return acc - sphere.radius * sphere.radius;
}

double anomaly_score(const SvddModel& model, const std::vector<double>& phi) {
  return anomaly_score(model.sphere, phi);
}

int classify(double score) {
  if (std::isnan(score)) throw std::invalid_argument("classify: NaN score");
  return score > 0.0 ? 1 : 0;
}

}  // namespace mpad::svdd
