#include "mpad/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mpad/metrics.hpp"

namespace mpad::base {

PcaModel pca_fit(const MatrixXd& X, double min_variance) {
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");
  if (min_variance <= 0.0 || min_variance > 1.0)
    throw std::invalid_argument("pca_fit: min_variance must be in (0,1]");

  PcaModel model;
  model.mean = X.colwise().mean();
  const MatrixXd centered = X.rowwise() - model.mean.transpose();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");

  // Ascending eigenvalues; walk from the back.
  const VectorXd& evals = eig.eigenvalues();
  const double total = std::max(0.0, evals.sum());
  if (total <= 0.0)
    throw std::invalid_argument("pca_fit: zero total variance (all-constant data), q = 0");

  std::vector<double> ratios;
  double cum = 0.0;
  Eigen::Index q = 0;
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    const double r = std::max(0.0, evals(i)) / total;
    ratios.push_back(r);
    cum += r;
    ++q;
    if (cum >= min_variance - 1e-12) break;
  }
  model.components.resize(q, d);
  model.explained_variance_ratio.resize(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    model.components.row(k) = eig.eigenvectors().col(d - 1 - k).transpose();
    model.explained_variance_ratio(k) = ratios[static_cast<std::size_t>(k)];
  }
  return model;
}

MatrixXd pca_transform(const PcaModel& model, const MatrixXd& X) {
  if (X.cols() != model.mean.size())
    throw std::invalid_argument("pca_transform: dimension mismatch");
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

// ---------------------------------------------------------------------------

namespace {

double rbf(const VectorXd& a, const VectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

}  // namespace

OcSvmModel ocsvm_fit(const MatrixXd& X, double gamma, double nu, double tol,
                     std::size_t max_iter) {
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::invalid_argument("ocsvm_fit: empty training set");
  if (gamma <= 0.0) throw std::invalid_argument("ocsvm_fit: gamma must be > 0");
  if (nu <= 0.0 || nu > 1.0) throw std::invalid_argument("ocsvm_fit: nu must be in (0,1]");

  const double C = 1.0 / (nu * static_cast<double>(n));

  MatrixXd Q(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Q(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) Q(i, j) = Q(j, i) = rbf(X.row(i), X.row(j), gamma);
  }

  // libsvm-style feasible start: the first floor(nu*n) points at the box
  // bound, one fractional point to land exactly on the simplex.
  VectorXd alpha = VectorXd::Zero(n);
  double remaining = 1.0;
  for (Eigen::Index i = 0; i < n && remaining > 0.0; ++i) {
    alpha(i) = std::min(C, remaining);
    remaining -= alpha(i);
  }

  VectorXd g = Q * alpha;  // gradient of 1/2 a'Qa

  bool converged = false;
  double residual = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    // Most violating pair: move mass from the largest gradient (among
    // decreasable alphas) to the smallest (among increasable ones).
    Eigen::Index up = -1, down = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (alpha(i) > 0.0 && g(i) > gmax) {
        gmax = g(i);
        up = i;
      }
      if (alpha(i) < C && g(i) < gmin) {
        gmin = g(i);
        down = i;
      }
    }
    residual = gmax - gmin;
    if (up < 0 || down < 0 || residual < tol) {
      converged = true;
      break;
    }
    const double denom = Q(up, up) + Q(down, down) - 2.0 * Q(up, down);
    double delta = (denom > 1e-12) ? residual / denom
                                   : std::numeric_limits<double>::infinity();
    delta = std::min(delta, std::min(alpha(up), C - alpha(down)));
    alpha(up) -= delta;
    alpha(down) += delta;
    g += delta * (Q.col(down) - Q.col(up));
  }
  if (!converged)
    throw std::runtime_error("ocsvm_fit: SMO did not converge, KKT residual " +
                             std::to_string(residual));

  OcSvmModel model;
  model.alphas = alpha;
  model.gamma = gamma;
  model.nu = nu;

  // rho from the free support vectors (average of their gradients); if all
  // SVs sit on the box, fall back to the KKT interval midpoint.
  double rho_sum = 0.0;
  int rho_count = 0;
  const double eps = 1e-8;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) > eps && alpha(i) < C - eps) {
      rho_sum += g(i);
      ++rho_count;
    }
  }
  if (rho_count > 0) {
    model.rho = rho_sum / rho_count;
  } else {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (alpha(i) > eps) lo = std::max(lo, g(i));  // can decrease: g <= rho is violated side
      if (alpha(i) < C - eps) hi = std::min(hi, g(i));
    }
    model.rho = (lo + hi) / 2.0;
  }

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < n; ++i)
    if (alpha(i) > eps) sv.push_back(i);
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  model.sv_alphas.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
    model.sv_alphas(static_cast<Eigen::Index>(k)) = alpha(sv[k]);
  }
  return model;
}

double ocsvm_score(const OcSvmModel& model, const VectorXd& x) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i)
    f += model.sv_alphas(i) * rbf(model.support_vectors.row(i), x, model.gamma);
  return model.rho - f;
}

// ---------------------------------------------------------------------------

double kde_score(const MatrixXd& train, double bandwidth, const VectorXd& x) {
  const Eigen::Index n = train.rows(), d = train.cols();
  if (n < 1) throw std::invalid_argument("kde_score: empty training set");
  if (bandwidth <= 0.0) throw std::invalid_argument("kde_score: bandwidth must be > 0");
  if (x.size() != d) throw std::invalid_argument("kde_score: dimension mismatch");

  // log density = logsumexp_i(-||x-xi||^2 / (2h^2)) - log n - (d/2) log(2 pi h^2)
  double max_e = -std::numeric_limits<double>::infinity();
  std::vector<double> exponents(static_cast<std::size_t>(n));
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  for (Eigen::Index i = 0; i < n; ++i) {
    exponents[static_cast<std::size_t>(i)] = -(x - train.row(i).transpose()).squaredNorm() * inv2h2;
    max_e = std::max(max_e, exponents[static_cast<std::size_t>(i)]);
  }
  double acc = 0.0;
  for (double e : exponents) acc += std::exp(e - max_e);
  const double log_density = max_e + std::log(acc) - std::log(static_cast<double>(n)) -
                             0.5 * d * std::log(2.0 * M_PI * bandwidth * bandwidth);
  return -log_density;
}

// ---------------------------------------------------------------------------

double iforest_c(int psi) {
  if (psi <= 1) return 0.0;
  // Exact harmonic numbers for small arguments keep c(2) == 1 exactly.
  auto harmonic = [](int m) {
    if (m <= 12) {
      double h = 0.0;
      for (int i = 1; i <= m; ++i) h += 1.0 / i;
      return h;
    }
    constexpr double euler_gamma = 0.5772156649015329;
    return std::log(static_cast<double>(m)) + euler_gamma;
  };
  return 2.0 * harmonic(psi - 1) - 2.0 * (psi - 1.0) / psi;
}

namespace {

int build_iso_node(IsoTree& tree, const MatrixXd& X, std::vector<Eigen::Index> rows,
                   int depth, int height_limit, Rng& rng) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  tree.nodes[id].size = static_cast<int>(rows.size());
  if (rows.size() <= 1 || depth >= height_limit) return id;

  // Pick a dimension with spread; give up after d tries (constant box).
  const Eigen::Index d = X.cols();
  int dim = -1;
  double lo = 0, hi = 0;
  for (Eigen::Index attempt = 0; attempt < d; ++attempt) {
    const int cand = static_cast<int>(rng.uniform_int(0, d - 1));
    lo = hi = X(rows[0], cand);
    for (Eigen::Index r : rows) {
      lo = std::min(lo, X(r, cand));
      hi = std::max(hi, X(r, cand));
    }
    if (hi > lo) {
      dim = cand;
      break;
    }
  }
  if (dim < 0) return id;

  const double split = rng.uniform(lo, hi);
  std::vector<Eigen::Index> left, right;
  for (Eigen::Index r : rows) (X(r, dim) < split ? left : right).push_back(r);
  if (left.empty() || right.empty()) return id;

  tree.nodes[id].split_dim = dim;
  tree.nodes[id].split_value = split;
  const int l = build_iso_node(tree, X, std::move(left), depth + 1, height_limit, rng);
  tree.nodes[id].left = l;
  const int r = build_iso_node(tree, X, std::move(right), depth + 1, height_limit, rng);
  tree.nodes[id].right = r;
  return id;
}

double iso_path_length(const IsoTree& tree, const VectorXd& x) {
  int node = 0;
  int depth = 0;
  while (tree.nodes[node].split_dim >= 0) {
    node = (x(tree.nodes[node].split_dim) < tree.nodes[node].split_value)
               ? tree.nodes[node].left
               : tree.nodes[node].right;
    ++depth;
  }
  return depth + iforest_c(tree.nodes[node].size);
}

}  // namespace

IsoForest iforest_fit(const MatrixXd& X, int n_trees, int subsample, Rng& rng) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw std::invalid_argument("iforest_fit: need at least 2 samples");
  if (n_trees < 1) throw std::invalid_argument("iforest_fit: need at least 1 tree");
  // Requesting a larger subsample than there is data clamps to n.
  const int psi = static_cast<int>(std::min<Eigen::Index>(subsample, n));
  const int height_limit = static_cast<int>(std::ceil(std::log2(std::max(2, psi))));

  IsoForest forest;
  forest.subsample_size = psi;
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int t = 0; t < n_trees; ++t) {
    // Subsample without replacement.
    for (int i = 0; i < psi; ++i) {
      const auto j = rng.uniform_int(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<Eigen::Index> rows(pool.begin(), pool.begin() + psi);
    IsoTree tree;
    build_iso_node(tree, X, std::move(rows), 0, height_limit, rng);
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

double iforest_score(const IsoForest& forest, const VectorXd& x) {
  double mean_path = 0.0;
  for (const auto& tree : forest.trees) mean_path += iso_path_length(tree, x);
  mean_path /= static_cast<double>(forest.trees.size());
  return std::pow(2.0, -mean_path / iforest_c(forest.subsample_size));
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> ocsvm_grid() {
  std::vector<std::pair<double, double>> grid;
  for (int e = -10; e <= -1; ++e)
    for (double nu : {0.01, 0.05, 0.1}) grid.emplace_back(std::pow(2.0, e), nu);
  return grid;
}

std::vector<double> kde_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(std::pow(2.0, 0.5 * k));
  return grid;
}

GridSearchResult grid_search_baseline(BaselineMethod method, const MatrixXd& train,
                                      const MatrixXd& test,
                                      const std::vector<int>& test_labels,
                                      std::uint64_t seed, bool select_on_train) {
  if (static_cast<Eigen::Index>(test_labels.size()) != test.rows())
    throw std::invalid_argument("grid_search_baseline: labels do not match test rows");

  struct Point {
    std::string params;
    std::function<std::pair<std::vector<double>, std::vector<double>>()> run;
  };
  std::vector<Point> points;

  auto scores_of = [&](auto&& score_fn) {
    std::vector<double> test_scores, train_scores;
    for (Eigen::Index i = 0; i < test.rows(); ++i)
      test_scores.push_back(score_fn(VectorXd(test.row(i))));
    for (Eigen::Index i = 0; i < train.rows(); ++i)
      train_scores.push_back(score_fn(VectorXd(train.row(i))));
    return std::pair{test_scores, train_scores};
  };

  switch (method) {
    case BaselineMethod::ocsvm:
      for (auto [gamma, nu] : ocsvm_grid())
        points.push_back({"gamma=" + std::to_string(gamma) + ",nu=" + std::to_string(nu),
                          [&, gamma = gamma, nu = nu] {
                            const OcSvmModel m = ocsvm_fit(train, gamma, nu);
                            return scores_of([&](const VectorXd& x) { return ocsvm_score(m, x); });
                          }});
      break;
    case BaselineMethod::kde:
      for (double h : kde_grid())
        points.push_back({"bandwidth=" + std::to_string(h), [&, h] {
                            return scores_of(
                                [&](const VectorXd& x) { return kde_score(train, h, x); });
                          }});
      break;
    case BaselineMethod::iforest:
      points.push_back({"n_trees=100,subsample=256", [&] {
                          Rng rng(seed);
                          const IsoForest f = iforest_fit(train, 100, 256, rng);
                          return scores_of(
                              [&](const VectorXd& x) { return iforest_score(f, x); });
                        }});
      break;
  }
  if (points.empty()) throw std::invalid_argument("grid_search_baseline: empty grid");

  GridSearchResult result;
  double best_key = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [test_scores, train_scores] = points[i].run();
    metrics::ScoredSet set{test_scores, test_labels};
    const double auc = metrics::roc_auc(set);
    result.points.push_back({points[i].params, auc});
    // Honest mode ranks by compactness on the training data only (lower
    // mean train anomaly score); default mirrors the best-of-grid report.
    const double key = select_on_train
                           ? -std::accumulate(train_scores.begin(), train_scores.end(), 0.0) /
                                 static_cast<double>(train_scores.size())
                           : auc;
    if (key > best_key) {
      best_key = key;
      result.best_index = i;
      result.best_auc = auc;
    }
  }
  return result;
}

}  // namespace mpad::base
