#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "greensentry/execution.hpp"
#include "greensentry/sensor_data.hpp"

namespace greensentry {

enum class RuleKind { below, above, abs_consecutive_diff_above };
enum class RuleCategory { natural, potential };

/// One threshold predicate. Comparisons are strict: a value equal to the
/// threshold never fires.
struct AnomalyRule {
  std::string id;
  Feature feature = Feature::temperature;
  RuleKind kind = RuleKind::above;
  double threshold = 0.0;
  RuleCategory category = RuleCategory::potential;

  friend bool operator==(const AnomalyRule&, const AnomalyRule&) = default;
};

class RuleSet {
 public:
  RuleSet() = default;
  /// Throws DataError on duplicate ids or non-finite thresholds.
  explicit RuleSet(std::vector<AnomalyRule> rules);

  const std::vector<AnomalyRule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  const AnomalyRule* find(std::string_view id) const;
  /// True if some below/above rule bounds this feature.
  bool has_bound_for(Feature f) const;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;

 private:
  std::vector<AnomalyRule> rules_;
};

/// The twelve greenhouse rules: three natural, nine potential.
RuleSet default_ruleset();

/// Text config, one rule per line: `id,feature,kind,threshold,category`.
/// Blank lines and `#` comments are skipped. The consecutive-difference
/// rule on temperature is written with the feature name `temperature_pair`.
RuleSet read_ruleset(std::istream& in);
void write_ruleset(const RuleSet& rules, std::ostream& out);

/// Fired rule ids for record i, in RuleSet order. Difference rules compare
/// with record i-1 only when both lie in the same segment.
std::vector<std::string> fired_rules(const Dataset& dataset, std::size_t i, const RuleSet& rules);

struct LabelReport {
  std::size_t total = 0;
  std::size_t anomalous = 0;
  std::map<std::string, std::size_t> fire_counts;  // every rule id present, zero included
};

struct LabelResult {
  Dataset dataset;
  LabelReport report;
};

LabelResult label(const Dataset& dataset, const RuleSet& rules, Execution exec = Execution::parallel);

/// Removes anomalous records. Throws DataError if any record is unlabeled
/// or if nothing normal remains.
Dataset scrub(const Dataset& labeled);

enum class InjectionKind { spike, stuck, drift };
std::string_view injection_kind_name(InjectionKind k);
InjectionKind parse_injection_kind(std::string_view name);

struct InjectionSpec {
  std::size_t count = 0;  // number of injection events
  std::vector<InjectionKind> kinds = {InjectionKind::spike};
  std::vector<Feature> targets = {kFeatureOrder.begin(), kFeatureOrder.end()};
  std::uint64_t seed = 0;
  // Magnitude policy: distance beyond the violated bound as a fraction of
  // the feature's observed range.
  double min_excess = 0.10;
  double max_excess = 0.50;
  int stuck_min_run = 5, stuck_max_run = 15;
  int drift_min_run = 20, drift_max_run = 60;
};

struct InjectionEntry {
  Timestamp time;
  Feature feature = Feature::moisture;
  InjectionKind kind = InjectionKind::spike;
  double old_value = 0.0;
  double new_value = 0.0;
};

struct InjectionResult {
  Dataset dataset;
  std::vector<InjectionEntry> log;  // one entry per modified record
};

/// Deterministic in (spec.seed, dataset). Spikes exceed an upper bound when
/// the feature has one; stuck and drift events pick any bound. Events never overlap each other
/// or records already labeled anomalous. Injected values are rounded to 6
/// decimals. If the input carries labels the output is relabeled with
/// `rules`. Throws DataError when a target has no bound rule or the events
/// do not fit.
InjectionResult inject(const Dataset& dataset, const InjectionSpec& spec, const RuleSet& rules);

/// CSV `timestamp,feature,kind,old_value,new_value`.
void write_injection_log(const std::vector<InjectionEntry>& log, std::ostream& out);

}  // namespace greensentry
