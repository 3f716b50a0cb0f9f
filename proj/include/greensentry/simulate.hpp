#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "greensentry/labeling.hpp"
#include "greensentry/sensor_data.hpp"

namespace greensentry {

enum class EventKind { cold_snap, pollution_spike, sensor_freeze };

/// An episode forced at a fixed time, in addition to the random ones.
struct ScheduledEvent {
  EventKind kind = EventKind::cold_snap;
  Timestamp start;
  int duration_minutes = 60;
};

struct SimConfig {
  Timestamp start = Timestamp::from_civil(2021, 4, 1);
  int days = 13;
  std::uint64_t seed = 7;
  std::vector<int> irrigation_times = {6 * 60, 18 * 60};  // minutes of day
  /// Multiplier on each feature's base noise level, kFeatureOrder.
  FeatureVector noise_scale = {1.0, 1.0, 1.0, 1.0, 1.0};
  /// Per-day probabilities of a random episode.
  double p_cold_snap = 0.0;
  double p_pollution_spike = 0.0;
  double p_sensor_freeze = 0.0;
  std::vector<ScheduledEvent> events;
  /// Temperature and humidity are sampled every this many minutes and held,
  /// like the 10-minute climate logger they stand in for.
  int climate_cadence_minutes = 10;

  /// Throws UsageError on days < 1, probabilities outside [0,1],
  /// negative noise or out-of-day irrigation times.
  void validate() const;
};

/// One record per minute for days x 1440 minutes; deterministic in config.
/// Values are quantised like the sensors (integer ADC counts, 0.01 for the
/// climate readings).
Dataset simulate(const SimConfig& config);

struct ReferenceScenario {
  SimConfig config;
  Dataset train;  // scrubbed normal data outside the test window
  Dataset test;   // labeled 3-day window with events and injections
  std::vector<InjectionEntry> injections;
  Timestamp test_begin;
  Timestamp test_end;  // exclusive
};

/// Fixed 13-day simulation (2021-04-01 .. 04-13) with the test window
/// 04-10 .. 04-12 holding one cold snap, one pollution episode, five spikes
/// per feature and two stuck-sensor runs.
ReferenceScenario reference_scenario(std::uint64_t seed = 7);

}  // namespace greensentry
