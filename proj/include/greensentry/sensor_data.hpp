#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "greensentry/timestamp.hpp"

namespace greensentry {

enum class Feature { moisture = 0, light, air_quality, temperature, humidity };

inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::array<Feature, kFeatureCount> kFeatureOrder = {
    Feature::moisture, Feature::light, Feature::air_quality, Feature::temperature, Feature::humidity};

std::string_view feature_name(Feature f);
/// Inverse of feature_name; throws ParseError.
Feature parse_feature(std::string_view name);
constexpr std::size_t index_of(Feature f) { return static_cast<std::size_t>(f); }

struct Sample {
  Timestamp time;
  double value = 0.0;
};

struct RawSeries {
  Feature sensor = Feature::moisture;
  std::vector<Sample> samples;  // strictly increasing, finite
};

struct Label {
  bool anomalous = false;
  std::vector<std::string> rule_ids;  // empty when normal

  static Label normal() { return {}; }
  static Label anomaly(std::vector<std::string> ids) { return {true, std::move(ids)}; }
  friend bool operator==(const Label&, const Label&) = default;
};

using FeatureVector = std::array<double, kFeatureCount>;

struct SensorRecord {
  Timestamp time;
  FeatureVector values{};  // kFeatureOrder
  std::optional<Label> label;

  double operator[](Feature f) const { return values[index_of(f)]; }
  double& operator[](Feature f) { return values[index_of(f)]; }
  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

/// Minute-resolution, time-ordered records. Segment starts are recomputed
/// from the timestamps on construction: a new segment begins wherever two
/// neighbouring records are more than one minute apart.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError if timestamps are not strictly increasing or a
  /// value is non-finite.
  explicit Dataset(std::vector<SensorRecord> records);

  const std::vector<SensorRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const SensorRecord& operator[](std::size_t i) const { return records_[i]; }

  /// Indices where segments begin; always contains 0 for a non-empty set.
  const std::vector<std::size_t>& segment_starts() const { return segment_starts_; }
  /// True when record i starts a segment (has no in-segment predecessor).
  bool starts_segment(std::size_t i) const;

  bool fully_labeled() const;
  std::size_t anomalous_count() const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.records_ == b.records_; }

 private:
  std::vector<SensorRecord> records_;
  std::vector<std::size_t> segment_starts_;
};

// ---- ingestion -----------------------------------------------------------

struct IngestResult {
  RawSeries series;
  std::size_t duplicate_count = 0;   // rows collapsed into a later duplicate
  std::size_t out_of_order_count = 0;  // rows that arrived before a predecessor
};

/// Two-column `timestamp,value` CSV with header. Throws IngestError with
/// the data row number for non-numeric or non-finite values.
IngestResult ingest_csv(std::istream& source, Feature sensor);

struct FillResult {
  RawSeries series;
  /// First sample after each gap the fill cap left open.
  std::vector<Timestamp> segment_breaks;
};

/// Each sample's value is held for at most `max_fill_minutes` minutes
/// (its own minute included), stepping by `interval_minutes`.
FillResult forward_fill(const RawSeries& series, int interval_minutes = 1, int max_fill_minutes = 10);

struct MergeResult {
  Dataset dataset;
  std::array<std::size_t, kFeatureCount> dropped_per_sensor{};  // minutes discarded per sensor
  std::vector<Timestamp> dropped_minutes;  // present in some series but not all
};

/// Inner join on epoch minute; `series` must hold one entry per sensor in
/// any order.
MergeResult align_merge(const std::vector<RawSeries>& series);

// ---- dataset CSV -----------------------------------------------------------

inline constexpr std::string_view kDatasetHeader =
    "timestamp,moisture,light,air_quality,temperature_f,humidity_pct,label";

/// At most 6 decimals, trailing zeros trimmed; "-0" normalised to "0".
std::string format_value(double v);
std::string format_label(const std::optional<Label>& label);
std::optional<Label> parse_label(std::string_view text);

void write_csv(const Dataset& dataset, std::ostream& sink);
Dataset read_dataset_csv(std::istream& source);

}  // namespace greensentry
