#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mpad/rng.hpp"

namespace mpad::base {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// All baseline scores share the orientation "larger = more anomalous".

// ---------------------------------------------------------------------------
struct PcaModel {
  VectorXd mean;
  MatrixXd components;  // q x d, orthonormal rows
  VectorXd explained_variance_ratio;
};

// Keeps the smallest leading component count whose cumulative variance
// ratio reaches min_variance.
PcaModel pca_fit(const MatrixXd& X, double min_variance = 0.95);
MatrixXd pca_transform(const PcaModel& model, const MatrixXd& X);

// ---------------------------------------------------------------------------
struct OcSvmModel {
  VectorXd alphas;         // over all training points (zeros for non-SVs)
  MatrixXd support_vectors;  // rows with alpha > 0
  VectorXd sv_alphas;
  double gamma = 1.0;
  double nu = 0.1;
  double rho = 0.0;
};

// Solves the one-class dual min 1/2 a'Qa, 0 <= a_i <= 1/(nu n), sum a = 1
// by most-violating-pair coordinate updates (SMO).
OcSvmModel ocsvm_fit(const MatrixXd& X, double gamma, double nu,
                     double tol = 1e-4, std::size_t max_iter = 200000);

// rho - sum_i alpha_i k(x_i, x): positive outside the learned region.
double ocsvm_score(const OcSvmModel& model, const VectorXd& x);

// ---------------------------------------------------------------------------
// Negative log of the Gaussian-product-kernel density estimate,
// log-sum-exp stabilized.
double kde_score(const MatrixXd& train, double bandwidth, const VectorXd& x);

// ---------------------------------------------------------------------------
struct IsoTreeNode {
  int split_dim = -1;
  double split_value = 0.0;
  int left = -1, right = -1;
  int size = 0;  // samples at this (external) node
};

struct IsoTree {
  std::vector<IsoTreeNode> nodes;
};

struct IsoForest {
  std::vector<IsoTree> trees;
  int subsample_size = 256;
};

// Average path length normalizer c(psi) = 2 H(psi-1) - 2 (psi-1)/psi.
double iforest_c(int psi);

IsoForest iforest_fit(const MatrixXd& X, int n_trees, int subsample, Rng& rng);
// 2^(-E[h(x)] / c(psi)), in (0,1).
double iforest_score(const IsoForest& forest, const VectorXd& x);

// ---------------------------------------------------------------------------
// Paper grids.
std::vector<std::pair<double, double>> ocsvm_grid();  // (gamma, nu), 10 x 3
std::vector<double> kde_grid();                       // 10 bandwidths

enum class BaselineMethod { ocsvm, kde, iforest };

struct GridPointResult {
  std::string params;
  double test_auc = 0.0;
};

struct GridSearchResult {
  std::vector<GridPointResult> points;
  std::size_t best_index = 0;
  double best_auc = 0.0;
};

// Fits every grid point on the train matrix and scores the test matrix;
// selection by test AUC (or by the training score mean when
// select_on_train is set).
GridSearchResult grid_search_baseline(BaselineMethod method, const MatrixXd& train,
                                      const MatrixXd& test,
                                      const std::vector<int>& test_labels,
                                      std::uint64_t seed, bool select_on_train = false);

}  // namespace mpad::base
