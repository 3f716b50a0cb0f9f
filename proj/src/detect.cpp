#include "greensentry/detect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "greensentry/autoencoder.hpp"
#include "greensentry/error.hpp"
#include "greensentry/model_state.hpp"
#include "greensentry/text.hpp"

namespace greensentry {

Threshold calibrate_threshold(const std::vector<double>& val_losses, int k) {
  if (k < 1) throw UsageError("calibrate_threshold: k must be >= 1");
  if (val_losses.size() < static_cast<std::size_t>(k)) throw DataError("insufficient validation data");
  for (double l : val_losses) {
    if (!std::isfinite(l)) throw DataError("calibrate_threshold: non-finite validation loss");
  }
  std::vector<double> top(val_losses);
  std::partial_sort(top.begin(), top.begin() + k, top.end(), std::greater<>());
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += top[static_cast<std::size_t>(i)];
  return {sum / k, k, val_losses.size()};
}

std::vector<Verdict> classify(const std::vector<double>& losses, const Threshold& t) {
  std::vector<Verdict> out;
  out.reserve(losses.size());
  for (double l : losses) out.push_back(l > t.value ? Verdict::anomalous : Verdict::normal);
  return out;
}

ConfusionMatrix confusion(const std::vector<Verdict>& predictions, const std::vector<Verdict>& labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == Verdict::anomalous;
    const bool actual = labels[i] == Verdict::anomalous;
    if (predicted && actual) {
      ++cm.tp;
    } else if (predicted) {
      ++cm.fp;
    } else if (actual) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

std::vector<Verdict> label_verdicts(const Dataset& dataset) {
  std::vector<Verdict> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records()) {
    if (!r.label) throw DataError("dataset is not labeled (" + format_iso(r.time) + ")");
    out.push_back(r.label->anomalous ? Verdict::anomalous : Verdict::normal);
  }
  return out;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("metrics: empty confusion matrix");
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  Metrics m;
  m.accuracy = d(cm.tp + cm.tn) / d(cm.total());
  if (cm.tp + cm.fp == 0) {
    m.undefined.insert("precision");
  } else {
    m.precision = d(cm.tp) / d(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    m.undefined.insert("recall");
  } else {
    m.recall = d(cm.tp) / d(cm.tp + cm.fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.undefined.insert("f1");
  } else {
    m.f1 = 2.0 * (m.precision * m.recall) / (m.precision + m.recall);
  }
  return m;
}

void write_loss_plot(std::ostream& out, const std::vector<Timestamp>& timestamps, const std::vector<double>& losses,
                     const std::vector<Verdict>& labels, const Threshold& t) {
  if (timestamps.size() != losses.size() || labels.size() != losses.size()) {
    throw DataError("export_plot_data: misaligned sequences");
  }
  out << "timestamp,loss,label,threshold\n";
  const std::string threshold = text::shortest(t.value);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out << format_iso(timestamps[i]) << ',' << text::shortest(losses[i]) << ','
        << (labels[i] == Verdict::anomalous ? "anomalous" : "normal") << ',' << threshold << '\n';
  }
}

std::vector<double> read_loss_plot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "timestamp,loss,label,threshold") {
    throw IngestError(0, "expected loss plot header");
  }
  std::vector<double> losses;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 4) throw IngestError(row, "expected 4 columns");
    const auto v = text::to_double(cells[1]);
    if (!v) throw IngestError(row, "non-numeric loss");
    losses.push_back(*v);
  }
  return losses;
}

void write_reconstruction_plot(std::ostream& out, const std::vector<Timestamp>& timestamps,
                               const std::vector<FeatureVector>& original,
                               const std::vector<FeatureVector>& reconstructed) {
  if (timestamps.size() != original.size() || original.size() != reconstructed.size()) {
    throw DataError("export_plot_data: misaligned sequences");
  }
  out << "timestamp";
  for (Feature f : kFeatureOrder) out << ',' << feature_name(f) << ',' << feature_name(f) << "_reconstructed";
  out << '\n';
  for (std::size_t i = 0; i < original.size(); ++i) {
    out << format_iso(timestamps[i]);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      out << ',' << format_value(original[i][f]) << ',' << format_value(reconstructed[i][f]);
    }
    out << '\n';
  }
}

EvaluationReport timed_detect(const ModelState& state, const Dataset& dataset, Execution exec) {
  if (!state.threshold) throw DataError("model not calibrated");
  EvaluationReport r;
  r.threshold = *state.threshold;
  r.labels = label_verdicts(dataset);
  const FeatureMatrix raw = to_matrix(dataset);

  const auto started = std::chrono::steady_clock::now();
  const FeatureMatrix scaled = transform(state.scaler, raw, exec);
  r.losses = reconstruction_losses(state.params, scaled, exec);
  r.predictions = classify(r.losses, r.threshold);
  r.confusion = confusion(r.predictions, r.labels);
  r.metrics = metrics(r.confusion);
  r.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  r.per_point_seconds = dataset.empty() ? 0.0 : r.total_seconds / static_cast<double>(dataset.size());

  // plot data, outside the timed region
  r.timestamps = raw.keys;
  r.reconstructed = inverse_transform(state.scaler, reconstruct(state.params, scaled, exec), exec).rows;
  return r;
}

std::string report_json(const EvaluationReport& report, bool include_timing) {
  nlohmann::json undefined = nlohmann::json::array();
  for (const auto& name : report.metrics.undefined) undefined.push_back(name);
  nlohmann::json doc = {
      {"points", report.losses.size()},
      {"confusion", {{"tp", report.confusion.tp}, {"tn", report.confusion.tn}, {"fp", report.confusion.fp},
                     {"fn", report.confusion.fn}}},
      {"metrics", {{"accuracy", report.metrics.accuracy}, {"precision", report.metrics.precision},
                   {"recall", report.metrics.recall}, {"f1", report.metrics.f1}}},
      {"undefined_metrics", undefined},
      {"threshold", {{"value", report.threshold.value}, {"k", report.threshold.k},
                     {"source_count", report.threshold.source_count}}},
  };
  if (include_timing) {
    doc["timing"] = {{"total_seconds", report.total_seconds}, {"per_point_seconds", report.per_point_seconds}};
  }
  return doc.dump(2) + "\n";
}

}  // namespace greensentry
