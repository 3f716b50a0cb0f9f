#include "greensentry/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "greensentry/error.hpp"
#include "greensentry/rng.hpp"
#include "greensentry/text.hpp"

namespace greensentry {
namespace {

constexpr std::string_view kPairFeature = "temperature_pair";

std::string_view kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::below: return "below";
    case RuleKind::above: return "above";
    case RuleKind::abs_consecutive_diff_above: return "abs_consecutive_diff_above";
  }
  return "?";
}

bool fires(const AnomalyRule& rule, const Dataset& d, std::size_t i) {
  const double v = d[i][rule.feature];
  switch (rule.kind) {
    case RuleKind::below: return v < rule.threshold;
    case RuleKind::above: return v > rule.threshold;
    case RuleKind::abs_consecutive_diff_above:
      if (d.starts_segment(i)) return false;
      return std::abs(v - d[i - 1][rule.feature]) > rule.threshold;
  }
  return false;
}

}  // namespace

RuleSet::RuleSet(std::vector<AnomalyRule> rules) : rules_(std::move(rules)) {
  std::set<std::string> seen;
  for (const auto& r : rules_) {
    if (r.id.empty()) throw DataError("rule with empty id");
    if (!seen.insert(r.id).second) throw DataError("duplicate rule id '" + r.id + "'");
    if (!std::isfinite(r.threshold)) throw DataError("rule '" + r.id + "' has a non-finite threshold");
  }
}

const AnomalyRule* RuleSet::find(std::string_view id) const {
  for (const auto& r : rules_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

bool RuleSet::has_bound_for(Feature f) const {
  return std::any_of(rules_.begin(), rules_.end(), [f](const AnomalyRule& r) {
    return r.feature == f && r.kind != RuleKind::abs_consecutive_diff_above;
  });
}

RuleSet default_ruleset() {
  using F = Feature;
  using K = RuleKind;
  constexpr auto N = RuleCategory::natural;
  constexpr auto P = RuleCategory::potential;
  return RuleSet({
      {"temp_low", F::temperature, K::below, 54.0, N},
      {"temp_diff", F::temperature, K::abs_consecutive_diff_above, 25.0, N},
      {"air_elevated", F::air_quality, K::above, 20.0, N},
      {"moisture_low", F::moisture, K::below, 1300.0, P},
      {"moisture_high", F::moisture, K::above, 1900.0, P},
      {"light_high", F::light, K::above, 640.0, P},
      {"light_low", F::light, K::below, 0.0, P},
      {"air_high", F::air_quality, K::above, 40.0, P},
      {"air_low", F::air_quality, K::below, 0.0, P},
      {"temp_high", F::temperature, K::above, 150.0, P},
      {"humidity_high", F::humidity, K::above, 90.0, P},
      {"humidity_low", F::humidity, K::below, 0.0, P},
  });
}

RuleSet read_ruleset(std::istream& in) {
  std::vector<AnomalyRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto cells = text::split(body, ',');
    if (cells.size() != 5) throw IngestError(lineno, "rule needs 5 fields: id,feature,kind,threshold,category");
    AnomalyRule r;
    r.id = std::string(text::trim(cells[0]));
    const auto feature = text::trim(cells[1]);
    const auto kind = text::trim(cells[2]);
    if (kind == "below") {
      r.kind = RuleKind::below;
    } else if (kind == "above") {
      r.kind = RuleKind::above;
    } else if (kind == "abs_consecutive_diff_above") {
      r.kind = RuleKind::abs_consecutive_diff_above;
    } else {
      throw IngestError(lineno, "unknown rule kind '" + std::string(kind) + "'");
    }
    if (feature == kPairFeature) {
      if (r.kind != RuleKind::abs_consecutive_diff_above) {
        throw IngestError(lineno, "temperature_pair only applies to abs_consecutive_diff_above");
      }
      r.feature = Feature::temperature;
    } else {
      try {
        r.feature = parse_feature(feature);
      } catch (const ParseError& e) {
        throw IngestError(lineno, e.what());
      }
    }
    const auto threshold = text::to_double(cells[3]);
    if (!threshold) throw IngestError(lineno, "non-numeric threshold");
    r.threshold = *threshold;
    const auto category = text::trim(cells[4]);
    if (category == "natural") {
      r.category = RuleCategory::natural;
    } else if (category == "potential") {
      r.category = RuleCategory::potential;
    } else {
      throw IngestError(lineno, "unknown category '" + std::string(category) + "'");
    }
    rules.push_back(std::move(r));
  }
  return RuleSet(std::move(rules));
}

void write_ruleset(const RuleSet& rules, std::ostream& out) {
  for (const auto& r : rules.rules()) {
    const bool pair = r.kind == RuleKind::abs_consecutive_diff_above && r.feature == Feature::temperature;
    out << r.id << ',' << (pair ? kPairFeature : feature_name(r.feature)) << ',' << kind_name(r.kind) << ','
        << text::shortest(r.threshold) << ',' << (r.category == RuleCategory::natural ? "natural" : "potential")
        << '\n';
  }
}

std::vector<std::string> fired_rules(const Dataset& dataset, std::size_t i, const RuleSet& rules) {
  std::vector<std::string> ids;
  for (const auto& rule : rules.rules()) {
    if (fires(rule, dataset, i)) ids.push_back(rule.id);
  }
  return ids;
}

LabelResult label(const Dataset& dataset, const RuleSet& rules, Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(dataset.size());
  std::vector<SensorRecord> records = dataset.records();
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      auto ids = fired_rules(dataset, static_cast<std::size_t>(i), rules);
      records[i].label = ids.empty() ? Label::normal() : Label::anomaly(std::move(ids));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      auto ids = fired_rules(dataset, static_cast<std::size_t>(i), rules);
      records[i].label = ids.empty() ? Label::normal() : Label::anomaly(std::move(ids));
    }
  }

  LabelResult result;
  result.report.total = records.size();
  for (const auto& r : rules.rules()) result.report.fire_counts[r.id] = 0;
  for (const auto& r : records) {
    if (!r.label->anomalous) continue;
    ++result.report.anomalous;
    for (const auto& id : r.label->rule_ids) ++result.report.fire_counts[id];
  }
  result.dataset = Dataset(std::move(records));
  return result;
}

Dataset scrub(const Dataset& labeled) {
  std::vector<SensorRecord> kept;
  kept.reserve(labeled.size());
  for (const auto& r : labeled.records()) {
    if (!r.label) throw DataError("scrub: dataset is not labeled (" + format_iso(r.time) + ")");
    if (!r.label->anomalous) kept.push_back(r);
  }
  if (kept.empty()) throw DataError("no normal data to train on");
  return Dataset(std::move(kept));
}

std::string_view injection_kind_name(InjectionKind k) {
  switch (k) {
    case InjectionKind::spike: return "spike";
    case InjectionKind::stuck: return "stuck";
    case InjectionKind::drift: return "drift";
  }
  return "?";
}

InjectionKind parse_injection_kind(std::string_view name) {
  name = text::trim(name);
  if (name == "spike") return InjectionKind::spike;
  if (name == "stuck") return InjectionKind::stuck;
  if (name == "drift") return InjectionKind::drift;
  throw ParseError("kind", "unknown injection kind '" + std::string(name) + "'");
}

InjectionResult inject(const Dataset& dataset, const InjectionSpec& spec, const RuleSet& rules) {
  if (spec.count == 0) return {dataset, {}};
  if (spec.count > dataset.size()) throw DataError("inject: count exceeds record count");
  if (spec.kinds.empty() || spec.targets.empty()) throw DataError("inject: kinds and targets must be non-empty");
  if (!(spec.min_excess > 0.0) || spec.max_excess < spec.min_excess) {
    throw DataError("inject: excess fractions must satisfy 0 < min <= max");
  }
  for (Feature f : spec.targets) {
    if (!rules.has_bound_for(f)) {
      throw DataError("inject: no rule bounds feature '" + std::string(feature_name(f)) + "'");
    }
  }

  std::array<double, kFeatureCount> range{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double lo = dataset[0].values[f];
    double hi = lo;
    for (const auto& r : dataset.records()) {
      lo = std::min(lo, r.values[f]);
      hi = std::max(hi, r.values[f]);
    }
    range[f] = hi > lo ? hi - lo : 1.0;
  }

  std::vector<char> taken(dataset.size(), 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& l = dataset[i].label;
    if (l && l->anomalous) taken[i] = 1;
  }

  Rng rng(spec.seed);
  std::vector<SensorRecord> records = dataset.records();
  std::vector<InjectionEntry> log;
  for (std::size_t event = 0; event < spec.count; ++event) {
    const InjectionKind kind = spec.kinds[rng.below(spec.kinds.size())];
    const Feature feature = spec.targets[rng.below(spec.targets.size())];
    std::vector<const AnomalyRule*> bounds, upper;
    for (const auto& r : rules.rules()) {
      if (r.feature != feature || r.kind == RuleKind::abs_consecutive_diff_above) continue;
      bounds.push_back(&r);
      if (r.kind == RuleKind::above) upper.push_back(&r);
    }
    // spikes overshoot the upper bound when there is one
    if (kind == InjectionKind::spike && !upper.empty()) bounds = upper;
    const AnomalyRule& bound = *bounds[rng.below(bounds.size())];
    const double direction = bound.kind == RuleKind::above ? 1.0 : -1.0;
    const double excess = rng.uniform(spec.min_excess, spec.max_excess) * range[index_of(feature)];

    std::size_t length = 1;
    if (kind == InjectionKind::stuck) {
      length = static_cast<std::size_t>(rng.between(spec.stuck_min_run, spec.stuck_max_run));
    } else if (kind == InjectionKind::drift) {
      length = static_cast<std::size_t>(rng.between(spec.drift_min_run, spec.drift_max_run));
    }
    if (length > dataset.size()) throw DataError("inject: run longer than dataset");

    std::size_t start = 0;
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      start = rng.below(dataset.size() - length + 1);
      placed = std::none_of(taken.begin() + static_cast<std::ptrdiff_t>(start),
                            taken.begin() + static_cast<std::ptrdiff_t>(start + length), [](char t) { return t; });
    }
    if (!placed) throw DataError("inject: could not place event " + std::to_string(event) + " without overlap");

    for (std::size_t k = 0; k < length; ++k) {
      double value = bound.threshold + direction * excess;
      if (kind == InjectionKind::drift) {
        // ramps outward from just past the bound
        const double lead = 0.02 * range[index_of(feature)];
        const double frac = length > 1 ? static_cast<double>(k) / static_cast<double>(length - 1) : 1.0;
        value = bound.threshold + direction * (lead + (std::max(excess, lead) - lead) * frac);
      }
      value = std::round(value * 1e6) / 1e6;  // exact through the 6-decimal CSV
      auto& rec = records[start + k];
      log.push_back({rec.time, feature, kind, rec[feature], value});
      rec[feature] = value;
      taken[start + k] = 1;
    }
  }
  std::stable_sort(log.begin(), log.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  Dataset out(std::move(records));
  // neighbours of injected records can change status (difference rules)
  const bool was_labeled = std::any_of(dataset.records().begin(), dataset.records().end(),
                                       [](const SensorRecord& r) { return r.label.has_value(); });
  if (was_labeled) out = label(out, rules).dataset;
  return {std::move(out), std::move(log)};
}

void write_injection_log(const std::vector<InjectionEntry>& log, std::ostream& out) {
  out << "timestamp,feature,kind,old_value,new_value\n";
  for (const auto& e : log) {
    out << format_iso(e.time) << ',' << feature_name(e.feature) << ',' << injection_kind_name(e.kind) << ','
        << text::shortest(e.old_value) << ',' << text::shortest(e.new_value) << '\n';
  }
}

}  // namespace greensentry
