#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mpad::metrics {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 non-anomalous, 1 anomalous
};

// Row-normalized percentages, layout (TN FP; FN TP). A row is invalid when
// its true class is absent from the set.
struct ConfusionPct {
  double tn = 0, fp = 0, fn = 0, tp = 0;
  bool row0_valid = true;
  bool row1_valid = true;
};

struct EvalReport {
  double roc_auc = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  ConfusionPct confusion;
  std::uint64_t seed = 0;
};

struct AggregateReport {
  double mean_roc_auc = 0.0;
  std::vector<double> per_seed_auc;
  std::vector<std::uint64_t> seeds;
  // Precision/recall/confusion come from the best-AUC run.
  EvalReport best;
};

// Mann-Whitney AUC with average ranks for ties. Throws if a class is absent.
double roc_auc(const ScoredSet& set);

// Sign rule, shared with the SVDD classifier: score > 0 -> 1.
std::vector<int> labels_from_scores(const std::vector<double>& scores);

// Per-class precision/recall averaged with equal class weight; an undefined
// per-class precision (no predictions for that class) counts as 0.
std::pair<double, double> macro_precision_recall(const std::vector<int>& pred,
                                                 const std::vector<int>& truth);

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth);

ConfusionPct confusion_matrix_pct(const std::vector<int>& pred,
                                  const std::vector<int>& truth);

// Full report from raw scores and true labels.
EvalReport evaluate(const ScoredSet& set, std::uint64_t seed = 0);

// Runs the experiment once per seed; mean ROC AUC over runs, remaining
// metrics from the best run.
AggregateReport multi_seed_report(const std::function<EvalReport(std::uint64_t)>& run,
                                  const std::vector<std::uint64_t>& seeds);

// CSV / aligned-text emission (one row per report).
std::string report_csv_header();
std::string report_csv_row(const std::string& name, const EvalReport& r);
std::string aggregate_table(const std::string& name, const AggregateReport& r);

}  // namespace mpad::metrics
