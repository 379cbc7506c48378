#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazeload/dataset.hpp"
#include "gazeload/forest.hpp"
#include "gazeload/mlp.hpp"

namespace gazeload {

// Confusion counts plus the derived metrics; positive class = high load.
// Zero-denominator metrics are reported as 0 with the matching flag set
// instead of NaN.
struct EvalReport {
  std::string model_tag;
  std::string dataset_tag;
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f1 = false;

  uint64_t total() const { return tp + fp + fn + tn; }
};

EvalReport report_from_counts(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn,
                              const std::string& model_tag = "",
                              const std::string& dataset_tag = "");

// MLP predicts high when P(high) >= threshold; the forest votes. Throws
// EmptyTestSet.
EvalReport evaluate(const MlpModel& model, const WindowedDataset& test, double threshold = 0.5,
                    const std::string& model_tag = "MLP", const std::string& dataset_tag = "test");
EvalReport evaluate(const ForestModel& model, const WindowedDataset& test,
                    const std::string& model_tag = "RF", const std::string& dataset_tag = "test");

// Two decimal places, round-half-up: 0.845 -> "0.85", 0.8449 -> "0.84".
std::string format_metric(double v);

// model,accuracy,precision,recall,f1 — one row per report.
std::string report_csv(const std::vector<EvalReport>& reports);

// Aligned text table with the same four metric columns; degenerate metrics
// are annotated under the table.
std::string report_table(const std::vector<EvalReport>& reports);

}  // namespace gazeload
