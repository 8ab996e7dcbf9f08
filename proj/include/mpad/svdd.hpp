#pragma once

#include <functional>
#include <vector>

#include "mpad/nets.hpp"
#include "mpad/tensor.hpp"

namespace mpad::svdd {

using nd::Tensor;

enum class FusionTag { early, late, late_dual };

struct Hypersphere {
  std::vector<double> center;
  double radius = 0.0;
};

struct SvddHyperParams {
  double nu = 0.4;
  double weight_decay = 1e-6;
  int warmup_epochs = 10;
  int epochs = 30;
  double lr = 1e-4;
  int batch_size = 32;
};

void validate_hp(const SvddHyperParams& hp);

struct SvddModel {
  nets::Encoder encoder;
  Hypersphere sphere;
  SvddHyperParams hp;
  FusionTag fusion_tag = FusionTag::early;
};

// Columnwise mean of the initial-pass embeddings; components inside
// (-eps, eps) are pushed to +-eps so the center cannot sit at the origin
// (hypersphere-collapse guard).
std::vector<double> init_center(const std::vector<std::vector<double>>& embeddings,
                                double eps = 0.1);

// Soft-boundary objective on a batch of embeddings (b x p):
//   R^2 + (1/(nu*b)) * sum_i max(0, ||phi_i - c||^2 - R^2).
// R is a tracked scalar, not a graph variable; the weight-decay term is
// applied by the optimizer.
Tensor svdd_loss(const Tensor& embeddings, const Hypersphere& sphere,
                 const SvddHyperParams& hp);

// R = sqrt of the (1-nu)-quantile of squared distances (linear
// interpolation between order statistics).
double update_radius(std::vector<double> distances_sq, double nu);

// Squared distances ||phi_i - c||^2 for a plain (non-tape) embedding matrix.
std::vector<double> squared_distances(const std::vector<std::vector<double>>& embeddings,
                                      const std::vector<double>& center);

// Second-stage training: epochs 1..k update W with R frozen at its initial
// quantile value; afterwards R is recomputed from the full training set
// after every epoch. `samples` are encoder inputs (one tensor per sample;
// for late fusion each view is its own sample).
SvddModel train_svdd(nets::Encoder encoder, const std::vector<Tensor>& samples,
                     const SvddHyperParams& hp, Rng& rng,
                     FusionTag tag = FusionTag::early);

// Eq.-style anomaly score ||phi - c||^2 - R^2; positive means outside the
// sphere.
double anomaly_score(const Hypersphere& sphere, const std::vector<double>& phi);
double anomaly_score(const SvddModel& model, const std::vector<double>& phi);

// Sign rule: score > 0 -> 1 (anomalous); the boundary itself counts as
// non-anomalous.
int classify(double score);

// Encode a batch of samples with a plain forward pass, returning row
// vectors (no gradients recorded downstream use).
std::vector<std::vector<double>> encode_all(const nets::Encoder& encoder,
                                            const std::vector<Tensor>& samples,
                                            int batch_size = 64);

}  // namespace mpad::svdd
