#include "mpad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mpad/svdd.hpp"

namespace mpad::metrics {

double roc_auc(const ScoredSet& set) {
  if (set.scores.size() != set.labels.size())
    throw std::invalid_argument("roc_auc: scores and labels differ in length");
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : set.labels) (l == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: both classes must be present");

  std::vector<std::size_t> order(set.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });

  // Average ranks over tie groups, then the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && set.scores[order[j + 1]] == set.scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      if (set.labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<int> labels_from_scores(const std::vector<double>& scores) {
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(svdd::classify(s));
  return out;
}

namespace {

struct Counts {
  // counts[truth][pred]
  double c[2][2] = {{0, 0}, {0, 0}};
};

Counts count(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("metrics: pred and truth differ in length");
  Counts out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if ((pred[i] != 0 && pred[i] != 1) || (truth[i] != 0 && truth[i] != 1))
      throw std::invalid_argument("metrics: labels must be binary");
    out.c[truth[i]][pred[i]] += 1.0;
  }
  return out;
}

}  // namespace

std::pair<double, double> macro_precision_recall(const std::vector<int>& pred,
                                                 const std::vector<int>& truth) {
  const Counts n = count(pred, truth);
  double precision = 0.0, recall = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const double tp = n.c[cls][cls];
    const double predicted = n.c[0][cls] + n.c[1][cls];
    const double actual = n.c[cls][0] + n.c[cls][1];
    precision += (predicted > 0) ? tp / predicted : 0.0;  // undefined -> 0
    recall += (actual > 0) ? tp / actual : 0.0;
  }
  return {precision / 2.0, recall / 2.0};
}

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Counts n = count(pred, truth);
  double f1 = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const double tp = n.c[cls][cls];
    const double predicted = n.c[0][cls] + n.c[1][cls];
    const double actual = n.c[cls][0] + n.c[cls][1];
    const double p = (predicted > 0) ? tp / predicted : 0.0;
    const double r = (actual > 0) ? tp / actual : 0.0;
    f1 += (p + r > 0) ? 2.0 * p * r / (p + r) : 0.0;
  }
  return f1 / 2.0;
}

ConfusionPct confusion_matrix_pct(const std::vector<int>& pred,
                                  const std::vector<int>& truth) {
  const Counts n = count(pred, truth);
  ConfusionPct out;
  const double neg = n.c[0][0] + n.c[0][1];
  const double pos = n.c[1][0] + n.c[1][1];
  out.row0_valid = neg > 0;
  out.row1_valid = pos > 0;
  if (out.row0_valid) {
    out.tn = 100.0 * n.c[0][0] / neg;
    out.fp = 100.0 * n.c[0][1] / neg;
  }
  if (out.row1_valid) {
    out.fn = 100.0 * n.c[1][0] / pos;
    out.tp = 100.0 * n.c[1][1] / pos;
  }
  return out;
}

EvalReport evaluate(const ScoredSet& set, std::uint64_t seed) {
  EvalReport r;
  r.roc_auc = roc_auc(set);
  const std::vector<int> pred = labels_from_scores(set.scores);
  std::tie(r.precision_macro, r.recall_macro) = macro_precision_recall(pred, set.labels);
  r.f1_macro = macro_f1(pred, set.labels);
  r.confusion = confusion_matrix_pct(pred, set.labels);
  r.seed = seed;
  return r;
}

AggregateReport multi_seed_report(const std::function<EvalReport(std::uint64_t)>& run,
                                  const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("multi_seed_report: need at least one seed");
  AggregateReport agg;
  agg.seeds = seeds;
  for (std::uint64_t seed : seeds) {
    EvalReport r;
    try {
      r = run(seed);
    } catch (const std::exception& e) {
      throw std::runtime_error("run with seed " + std::to_string(seed) +
                               " failed: " + e.what());
    }
    r.seed = seed;
    agg.per_seed_auc.push_back(r.roc_auc);
    if (agg.per_seed_auc.size() == 1 || r.roc_auc > agg.best.roc_auc) agg.best = r;
  }
  agg.mean_roc_auc =
      std::accumulate(agg.per_seed_auc.begin(), agg.per_seed_auc.end(), 0.0) /
      static_cast<double>(agg.per_seed_auc.size());
  return agg;
}

namespace {

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::string confusion_str(const ConfusionPct& c) {
  auto row = [](bool valid, double a, double b) {
    if (!valid) return std::string("n/a n/a");
    return std::to_string(static_cast<long>(std::lround(a))) + " " +
           std::to_string(static_cast<long>(std::lround(b)));
  };
  return "(" + row(c.row0_valid, c.tn, c.fp) + "; " + row(c.row1_valid, c.fn, c.tp) + ")";
}

}  // namespace

std::string report_csv_header() {
  return "name,seed,roc_auc,precision_macro,recall_macro,f1_macro,tn_pct,fp_pct,fn_pct,tp_pct";
}

std::string report_csv_row(const std::string& name, const EvalReport& r) {
  std::ostringstream os;
  os << name << "," << r.seed << "," << fmt(r.roc_auc) << "," << fmt(r.precision_macro)
     << "," << fmt(r.recall_macro) << "," << fmt(r.f1_macro) << "," << fmt(r.confusion.tn, 2)
     << "," << fmt(r.confusion.fp, 2) << "," << fmt(r.confusion.fn, 2) << ","
     << fmt(r.confusion.tp, 2);
  return os.str();
}

std::string aggregate_table(const std::string& name, const AggregateReport& r) {
  std::ostringstream os;
  os << "Technique            ROC AUC  Precision  Recall  Confusion Matrix (TN FP; FN TP) (%)\n";
  os << name;
  for (std::size_t i = name.size(); i < 21; ++i) os << ' ';
  os << fmt(r.mean_roc_auc, 3) << "    " << fmt(r.best.precision_macro, 3) << "      "
     << fmt(r.best.recall_macro, 3) << "   " << confusion_str(r.best.confusion) << "\n";
  os << "seeds:";
  for (std::size_t i = 0; i < r.seeds.size(); ++i)
    os << " " << r.seeds[i] << "=" << fmt(r.per_seed_auc[i], 3);
  os << "\n";
  return os.str();
}

}  // namespace mpad::metrics
