#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "greensentry/execution.hpp"
#include "greensentry/sensor_data.hpp"

namespace greensentry {

struct ModelState;

struct Threshold {
  double value = 0.0;
  int k = 5;                     // number of largest losses averaged
  std::size_t source_count = 0;  // validation losses seen

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Mean of the k largest losses, ties counted by multiplicity. Throws
/// DataError("insufficient validation data") when fewer than k values.
Threshold calibrate_threshold(const std::vector<double>& val_losses, int k = 5);

enum class Verdict : unsigned char { normal = 0, anomalous = 1 };

/// Strictly above the threshold is anomalous; equality is normal.
std::vector<Verdict> classify(const std::vector<double>& losses, const Threshold& t);

/// Positive class is "anomalous".
struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(const std::vector<Verdict>& predictions, const std::vector<Verdict>& labels);
/// Label verdicts from a labeled dataset; throws DataError if a record is unlabeled.
std::vector<Verdict> label_verdicts(const Dataset& dataset);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::set<std::string> undefined;  // metrics whose denominator was zero (reported as 0)
};

/// Throws DataError on an empty matrix.
Metrics metrics(const ConfusionMatrix& cm);

/// `timestamp,loss,label,threshold`, losses in shortest round-trip form.
void write_loss_plot(std::ostream& out, const std::vector<Timestamp>& timestamps, const std::vector<double>& losses,
                     const std::vector<Verdict>& labels, const Threshold& t);
/// Reads back the loss column of a loss plot file.
std::vector<double> read_loss_plot(std::istream& in);

/// `timestamp,<feature>,<feature>_reconstructed,...` in sensor units.
void write_reconstruction_plot(std::ostream& out, const std::vector<Timestamp>& timestamps,
                               const std::vector<FeatureVector>& original,
                               const std::vector<FeatureVector>& reconstructed);

struct EvaluationReport {
  Threshold threshold;
  std::vector<Timestamp> timestamps;
  std::vector<double> losses;
  std::vector<Verdict> predictions;
  std::vector<Verdict> labels;
  std::vector<FeatureVector> reconstructed;  // sensor units
  ConfusionMatrix confusion;
  Metrics metrics;
  double total_seconds = 0.0;
  double per_point_seconds = 0.0;
};

/// transform -> reconstruction_losses -> classify -> confusion -> metrics,
/// timed end to end. The dataset must be labeled. Throws
/// DataError("model not calibrated") if the state has no threshold.
EvaluationReport timed_detect(const ModelState& state, const Dataset& dataset, Execution exec = Execution::serial);

/// JSON summary: counts, metrics, undefined flags, threshold and (unless
/// disabled) the timing block.
std::string report_json(const EvaluationReport& report, bool include_timing = true);

}  // namespace greensentry
