#include "gazeload/eval.hpp"

#include <cmath>
#include <sstream>

#include "gazeload/error.hpp"

namespace gazeload {
namespace {

EvalReport count_predictions(const std::vector<int>& predicted, const WindowedDataset& test,
                             const std::string& model_tag, const std::string& dataset_tag) {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const bool pos = predicted[i] == 1;
    const bool truth = test.labels[i] == 1;
    if (pos && truth)
      ++tp;
    else if (pos && !truth)
      ++fp;
    else if (!pos && truth)
      ++fn;
    else
      ++tn;
  }
  return report_from_counts(tp, fp, fn, tn, model_tag, dataset_tag);
}

}  // namespace

EvalReport report_from_counts(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn,
                              const std::string& model_tag, const std::string& dataset_tag) {
  EvalReport r;
  r.model_tag = model_tag;
  r.dataset_tag = dataset_tag;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  const uint64_t total = tp + fp + fn + tn;
  r.accuracy = total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
  if (tp + fp > 0)
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  else
    r.degenerate_precision = true;
  if (tp + fn > 0)
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  else
    r.degenerate_recall = true;
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else
    r.degenerate_f1 = true;
  return r;
}

EvalReport evaluate(const MlpModel& model, const WindowedDataset& test, double threshold,
                    const std::string& model_tag, const std::string& dataset_tag) {
  if (test.rows() == 0) throw GazeError(ErrorCode::EmptyTestSet, "evaluate(MLP)");
  std::vector<double> p = mlp_forward_batch(model, test.inputs);
  std::vector<int> pred(p.size());
  for (size_t i = 0; i < p.size(); ++i) pred[i] = p[i] >= threshold ? 1 : 0;
  return count_predictions(pred, test, model_tag, dataset_tag);
}

EvalReport evaluate(const ForestModel& model, const WindowedDataset& test,
                    const std::string& model_tag, const std::string& dataset_tag) {
  if (test.rows() == 0) throw GazeError(ErrorCode::EmptyTestSet, "evaluate(RF)");
  std::vector<int> pred(test.rows());
  for (size_t i = 0; i < test.rows(); ++i) pred[i] = forest_predict(model, test.inputs.row_ptr(i));
  return count_predictions(pred, test, model_tag, dataset_tag);
}

std::string format_metric(double v) {
  // round-half-up at two decimals; the +1e-9 absorbs binary representation
  // error so a nominal .xx5 rounds up even when stored as .xx49999...
  const long long cents = static_cast<long long>(std::floor(v * 100.0 + 0.5 + 1e-9));
  std::string out = std::to_string(cents / 100);
  out += '.';
  const long long rem = cents % 100;
  out += static_cast<char>('0' + rem / 10);
  out += static_cast<char>('0' + rem % 10);
  return out;
}

std::string report_csv(const std::vector<EvalReport>& reports) {
  std::string out = "model,accuracy,precision,recall,f1\n";
  for (const EvalReport& r : reports) {
    out += r.model_tag;
    out += ',' + format_metric(r.accuracy);
    out += ',' + format_metric(r.precision);
    out += ',' + format_metric(r.recall);
    out += ',' + format_metric(r.f1);
    out += '\n';
  }
  return out;
}

std::string report_table(const std::vector<EvalReport>& reports) {
  size_t tag_w = 5;  // "Model"
  for (const EvalReport& r : reports) tag_w = std::max(tag_w, r.model_tag.size());
  std::ostringstream out;
  out << "Model";
  out << std::string(tag_w - 5, ' ');
  out << "  Accuracy  Precision  Recall  F1\n";
  for (const EvalReport& r : reports) {
    out << r.model_tag << std::string(tag_w - r.model_tag.size(), ' ');
    out << "  " << std::string(8 - 4, ' ') << format_metric(r.accuracy);
    out << "  " << std::string(9 - 4, ' ') << format_metric(r.precision);
    out << "  " << std::string(6 - 4, ' ') << format_metric(r.recall);
    out << "  " << format_metric(r.f1);
    out << '\n';
  }
  for (const EvalReport& r : reports) {
    if (r.degenerate_precision)
      out << "note: " << r.model_tag << " precision undefined (no positive predictions); 0 reported\n";
    if (r.degenerate_recall)
      out << "note: " << r.model_tag << " recall undefined (no positive labels); 0 reported\n";
    if (r.degenerate_f1)
      out << "note: " << r.model_tag << " f1 undefined (precision + recall = 0); 0 reported\n";
  }
  return out.str();
}

}  // namespace gazeload
