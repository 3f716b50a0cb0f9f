#include "greensentry/sensor_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "greensentry/error.hpp"
#include "greensentry/text.hpp"

namespace greensentry {

namespace text {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace text

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "moisture", "light", "air_quality", "temperature", "humidity"};

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

std::string_view feature_name(Feature f) { return kFeatureNames[index_of(f)]; }

Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return kFeatureOrder[i];
  }
  throw ParseError("feature", "unknown feature '" + std::string(name) + "'");
}

// ---- Dataset ---------------------------------------------------------------

Dataset::Dataset(std::vector<SensorRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (double v : records_[i].values) {
      if (!std::isfinite(v)) {
        throw DataError("record " + std::to_string(i) + " (" + format_iso(records_[i].time) +
                        ") holds a non-finite value");
      }
    }
    if (i == 0) {
      segment_starts_.push_back(0);
      continue;
    }
    const auto gap = records_[i].time.epoch_minute - records_[i - 1].time.epoch_minute;
    if (gap <= 0) {
      throw DataError("timestamps not strictly increasing at record " + std::to_string(i) + " (" +
                      format_iso(records_[i].time) + ")");
    }
    if (gap > 1) segment_starts_.push_back(i);
  }
}

bool Dataset::starts_segment(std::size_t i) const {
  return std::binary_search(segment_starts_.begin(), segment_starts_.end(), i);
}

bool Dataset::fully_labeled() const {
  return std::all_of(records_.begin(), records_.end(), [](const auto& r) { return r.label.has_value(); });
}

std::size_t Dataset::anomalous_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) {
    return r.label && r.label->anomalous;
  }));
}

// ---- ingestion ---------------------------------------------------------------

IngestResult ingest_csv(std::istream& source, Feature sensor) {
  std::string line;
  if (!read_line(source, line)) throw IngestError(0, "missing header");
  const auto header = text::split(line, ',');
  if (header.size() != 2 || text::trim(header[0]) != "timestamp") {
    throw IngestError(0, "expected header 'timestamp,value'");
  }

  std::vector<Sample> rows;
  std::size_t row = 0;
  while (read_line(source, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 2) throw IngestError(row, "expected 2 columns, got " + std::to_string(cells.size()));
    Timestamp t;
    try {
      t = parse_timestamp(cells[0]);
    } catch (const ParseError& e) {
      throw IngestError(row, e.what());
    }
    const auto v = text::to_double(cells[1]);
    if (!v) throw IngestError(row, "non-numeric value '" + std::string(text::trim(cells[1])) + "'");
    if (!std::isfinite(*v)) throw IngestError(row, "non-finite value");
    rows.push_back({t, *v});
  }

  IngestResult result;
  result.series.sensor = sensor;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].time < rows[i - 1].time) ++result.out_of_order_count;
  }
  // stable sort keeps file order among equal stamps, so "last" wins below
  std::stable_sort(rows.begin(), rows.end(), [](const Sample& a, const Sample& b) { return a.time < b.time; });
  for (const auto& s : rows) {
    auto& out = result.series.samples;
    if (!out.empty() && out.back().time == s.time) {
      out.back().value = s.value;
      ++result.duplicate_count;
    } else {
      out.push_back(s);
    }
  }
  return result;
}

FillResult forward_fill(const RawSeries& series, int interval_minutes, int max_fill_minutes) {
  if (series.samples.empty()) throw DataError("forward_fill: empty series");
  if (interval_minutes < 1) throw DataError("forward_fill: interval must be >= 1 minute");
  if (max_fill_minutes < interval_minutes) throw DataError("forward_fill: max_fill must be >= interval");

  FillResult result;
  result.series.sensor = series.sensor;
  auto& out = result.series.samples;
  const auto& in = series.samples;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out.push_back(in[i]);
    if (i + 1 == in.size()) break;
    const auto start = in[i].time.epoch_minute;
    const auto next = in[i + 1].time.epoch_minute;
    auto t = start + interval_minutes;
    for (; t < next && t - start < max_fill_minutes; t += interval_minutes) {
      out.push_back({Timestamp{t}, in[i].value});
    }
    if (t < next) result.segment_breaks.push_back(in[i + 1].time);
  }
  return result;
}

MergeResult align_merge(const std::vector<RawSeries>& series) {
  std::array<const RawSeries*, kFeatureCount> by_sensor{};
  for (const auto& s : series) {
    auto& slot = by_sensor[index_of(s.sensor)];
    if (slot) throw DataError("align_merge: duplicate series for " + std::string(feature_name(s.sensor)));
    slot = &s;
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!by_sensor[f]) throw DataError("align_merge: missing series for " + std::string(kFeatureNames[f]));
  }

  // k-way walk over sorted inputs; cursor[f] indexes into sensor f
  MergeResult result;
  std::array<std::size_t, kFeatureCount> cursor{};
  std::vector<SensorRecord> records;
  std::set<std::int64_t> dropped;
  while (true) {
    bool any_left = false;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool first = true;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& s = by_sensor[f]->samples;
      if (cursor[f] >= s.size()) continue;
      any_left = true;
      const auto t = s[cursor[f]].time.epoch_minute;
      lo = first ? t : std::min(lo, t);
      hi = first ? t : std::max(hi, t);
      first = false;
    }
    if (!any_left) break;

    bool all_present = true;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& s = by_sensor[f]->samples;
      if (cursor[f] >= s.size() || s[cursor[f]].time.epoch_minute != lo) all_present = false;
    }
    if (all_present && lo == hi) {
      SensorRecord r;
      r.time = Timestamp{lo};
      for (std::size_t f = 0; f < kFeatureCount; ++f) r.values[f] = by_sensor[f]->samples[cursor[f]++].value;
      records.push_back(std::move(r));
      continue;
    }
    // minute `lo` is missing from at least one sensor
    dropped.insert(lo);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& s = by_sensor[f]->samples;
      if (cursor[f] < s.size() && s[cursor[f]].time.epoch_minute == lo) {
        ++result.dropped_per_sensor[f];
        ++cursor[f];
      }
    }
  }
  if (records.empty()) throw DataError("no overlapping time range");
  result.dataset = Dataset(std::move(records));
  for (auto m : dropped) result.dropped_minutes.push_back(Timestamp{m});
  return result;
}

// ---- dataset CSV -------------------------------------------------------------

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string format_label(const std::optional<Label>& label) {
  if (!label) return {};
  if (!label->anomalous) return "normal";
  std::string out = "anomalous:";
  for (std::size_t i = 0; i < label->rule_ids.size(); ++i) {
    if (i) out += ';';
    out += label->rule_ids[i];
  }
  return out;
}

std::optional<Label> parse_label(std::string_view text) {
  text = text::trim(text);
  if (text.empty()) return std::nullopt;
  if (text == "normal") return Label::normal();
  constexpr std::string_view prefix = "anomalous";
  if (text.substr(0, prefix.size()) != prefix) throw ParseError("label", "unknown label '" + std::string(text) + "'");
  text.remove_prefix(prefix.size());
  Label label = Label::anomaly({});
  if (text.empty()) return label;
  if (text.front() != ':') throw ParseError("label", "expected ':' after 'anomalous'");
  text.remove_prefix(1);
  for (auto id : text::split(text, ';')) {
    id = text::trim(id);
    if (!id.empty()) label.rule_ids.emplace_back(id);
  }
  return label;
}

void write_csv(const Dataset& dataset, std::ostream& sink) {
  sink << kDatasetHeader << '\n';
  for (const auto& r : dataset.records()) {
    sink << format_iso(r.time);
    for (double v : r.values) sink << ',' << format_value(v);
    sink << ',' << format_label(r.label) << '\n';
  }
  sink.flush();
  if (!sink) throw DataError("write_csv: sink write failed");
}

Dataset read_dataset_csv(std::istream& source) {
  std::string line;
  if (!read_line(source, line)) throw IngestError(0, "missing header");
  if (text::trim(line) != kDatasetHeader) {
    throw IngestError(0, "expected header '" + std::string(kDatasetHeader) + "'");
  }
  std::vector<SensorRecord> records;
  std::size_t row = 0;
  while (read_line(source, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 7) throw IngestError(row, "expected 7 columns, got " + std::to_string(cells.size()));
    SensorRecord r;
    try {
      r.time = parse_timestamp(cells[0]);
      r.label = parse_label(cells[6]);
    } catch (const ParseError& e) {
      throw IngestError(row, e.what());
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto v = text::to_double(cells[f + 1]);
      if (!v) throw IngestError(row, "non-numeric " + std::string(kFeatureNames[f]) + " value");
      if (!std::isfinite(*v)) throw IngestError(row, "non-finite " + std::string(kFeatureNames[f]) + " value");
      r.values[f] = *v;
    }
    records.push_back(std::move(r));
  }
  try {
    return Dataset(std::move(records));
  } catch (const DataError& e) {
    throw IngestError(row, e.what());
  }
}

}  // namespace greensentry
