#include "greensentry/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "greensentry/error.hpp"
#include "greensentry/rng.hpp"

namespace greensentry {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSunrise = 6 * 60;
constexpr int kSunset = 20 * 60;

// Base noise standard deviations, kFeatureOrder.
constexpr FeatureVector kNoiseSigma = {2.0, 4.0, 0.8, 0.25, 1.0};

struct DayParams {
  double light_peak;
  double temp_high;
  double temp_low;
  double moisture_peak;
  double moisture_floor;
  double air_base;
};

DayParams draw_day(Rng& rng) {
  DayParams p{};
  p.light_peak = rng.uniform(560.0, 630.0);
  p.temp_high = rng.uniform(89.0, 95.0);
  p.temp_low = rng.uniform(61.0, 68.0);
  p.moisture_peak = rng.uniform(1860.0, 1885.0);
  p.moisture_floor = rng.uniform(1340.0, 1380.0);
  p.air_base = rng.uniform(7.0, 10.0);
  return p;
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Episodes switch on and off abruptly; a cold snap's drop (<= 22 F from a
// night-time reading) stays under the 25 F consecutive-difference rule.
struct Episode {
  EventKind kind;
  std::int64_t start;
  std::int64_t end;
  double level;     // snap temperature / pollution level
  Feature frozen;   // sensor_freeze target

  bool active(std::int64_t t) const { return t >= start && t < end; }
};

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

void SimConfig::validate() const {
  if (days < 1) throw UsageError("sim: days must be >= 1");
  for (double p : {p_cold_snap, p_pollution_spike, p_sensor_freeze}) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("sim: event probabilities must lie in [0,1]");
  }
  for (double s : noise_scale) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw UsageError("sim: noise_scale must be finite and >= 0");
  }
  for (int m : irrigation_times) {
    if (m < 0 || m >= kMinutesPerDay) throw UsageError("sim: irrigation times must be minutes of day");
  }
  if (climate_cadence_minutes < 1) throw UsageError("sim: climate cadence must be >= 1 minute");
  for (const auto& e : events) {
    if (e.duration_minutes < 1) throw UsageError("sim: event duration must be >= 1 minute");
  }
}

Dataset simulate(const SimConfig& config) {
  config.validate();
  Rng day_rng = Rng::derive(config.seed, 1);
  Rng event_rng = Rng::derive(config.seed, 2);
  Rng noise_rng = Rng::derive(config.seed, 3);

  // one extra day so parameters can be interpolated across midnight
  std::vector<DayParams> day(static_cast<std::size_t>(config.days) + 1);
  for (auto& p : day) p = draw_day(day_rng);

  const std::int64_t t0 = config.start.epoch_minute;
  const std::int64_t total = static_cast<std::int64_t>(config.days) * kMinutesPerDay;

  std::vector<Episode> episodes;
  for (const auto& e : config.events) {
    Episode ep{e.kind, e.start.epoch_minute, e.start.epoch_minute + e.duration_minutes, 0.0, Feature::light};
    ep.level = e.kind == EventKind::cold_snap ? event_rng.uniform(46.0, 50.0) : event_rng.uniform(28.0, 60.0);
    ep.frozen = event_rng.bernoulli(0.5) ? Feature::light : Feature::moisture;
    episodes.push_back(ep);
  }
  for (int d = 0; d < config.days; ++d) {
    const std::int64_t day_start = t0 + d * kMinutesPerDay;
    // fixed draw order per day, independent of which episodes fire
    const bool cold = event_rng.bernoulli(config.p_cold_snap);
    const auto cold_start = day_start + event_rng.between(0, 5 * 60);
    const auto cold_len = event_rng.between(90, 240);
    const double cold_level = event_rng.uniform(46.0, 50.0);
    const bool smog = event_rng.bernoulli(config.p_pollution_spike);
    const auto smog_start = day_start + event_rng.between(8 * 60, 17 * 60);
    const auto smog_len = event_rng.between(30, 90);
    const double smog_level = event_rng.uniform(28.0, 60.0);
    const bool freeze = event_rng.bernoulli(config.p_sensor_freeze);
    const auto freeze_start = day_start + event_rng.between(0, kMinutesPerDay - 1);
    const auto freeze_len = event_rng.between(30, 120);
    const Feature freeze_target = event_rng.bernoulli(0.5) ? Feature::light : Feature::moisture;
    if (cold) episodes.push_back({EventKind::cold_snap, cold_start, cold_start + cold_len, cold_level, Feature::light});
    if (smog) {
      episodes.push_back({EventKind::pollution_spike, smog_start, smog_start + smog_len, smog_level, Feature::light});
    }
    if (freeze) {
      episodes.push_back({EventKind::sensor_freeze, freeze_start, freeze_start + freeze_len, 0.0, freeze_target});
    }
  }

  const auto& ns = config.noise_scale;
  std::vector<SensorRecord> records(static_cast<std::size_t>(total));

  // slow AR(1) disturbances (clouds, weather drift, air baseline)
  double cloud = 0.0, temp_drift = 0.0, air_drift = 0.0;
  double moisture = 1700.0;
  double moisture_peak = 1700.0;
  std::int64_t last_irrigation = -1;
  double held_temp = 0.0, held_humidity = 0.0;
  FeatureVector frozen_value{};
  std::array<bool, kFeatureCount> frozen_active{};

  for (std::int64_t k = 0; k < total; ++k) {
    const std::int64_t t = t0 + k;
    const auto d = static_cast<std::size_t>(k / kMinutesPerDay);
    const int m = static_cast<int>(k % kMinutesPerDay);
    const double frac = static_cast<double>(m) / kMinutesPerDay;
    const DayParams& today = day[d];
    const DayParams& tomorrow = day[d + 1];

    // draw every noise term each minute so streams stay aligned
    const double n_cloud = noise_rng.normal();
    const double n_light = noise_rng.normal();
    const double n_night = noise_rng.normal();
    const double n_temp_drift = noise_rng.normal();
    const double n_temp = noise_rng.normal();
    const double n_hum = noise_rng.normal();
    const double n_moist = noise_rng.normal();
    const double n_air_drift = noise_rng.normal();
    const double n_air = noise_rng.normal();

    cloud = 0.995 * cloud + 0.02 * n_cloud * ns[1];
    temp_drift = 0.998 * temp_drift + 0.03 * n_temp_drift * ns[3];
    air_drift = 0.99 * air_drift + 0.05 * n_air_drift * ns[2];

    // light: half-sine day, dim night floor
    double light = std::clamp(4.0 + 1.5 * n_night * ns[1], 0.0, 10.0);
    if (m > kSunrise && m < kSunset) {
      const double sun = std::sin(kPi * (m - kSunrise) / (kSunset - kSunrise));
      const double shade = 1.0 - std::clamp(std::abs(cloud), 0.0, 0.3);
      light = std::max(light, today.light_peak * sun * shade + kNoiseSigma[1] * n_light * ns[1]);
    }
    light = std::clamp(std::round(light), 0.0, 640.0);

    // temperature: cosine day curve peaking mid-afternoon
    const double high = lerp(today.temp_high, tomorrow.temp_high, frac);
    const double low = lerp(today.temp_low, tomorrow.temp_low, frac);
    const double shape = std::pow(0.5 * (1.0 + std::cos(2.0 * kPi * (m - 15 * 60) / kMinutesPerDay)), 0.7);
    double temp = low + (high - low) * shape + std::clamp(temp_drift, -2.0, 2.0) + kNoiseSigma[3] * n_temp * ns[3];
    temp = std::clamp(temp, 58.0, 97.0);

    // moisture: irrigation pulses then exponential drying toward the floor
    for (int it : config.irrigation_times) {
      if (m == it) {
        last_irrigation = t;
        moisture_peak = today.moisture_peak;
      }
    }
    const double floor = lerp(today.moisture_floor, tomorrow.moisture_floor, frac);
    if (last_irrigation >= 0 && t - last_irrigation < 5) {
      moisture = lerp(moisture, moisture_peak, 0.5);
    } else {
      moisture = floor + (moisture - floor) * std::exp(-1.0 / 420.0);
    }
    const double moisture_out =
        std::clamp(std::round(moisture + kNoiseSigma[0] * n_moist * ns[0]), 1302.0, 1898.0);

    // air quality: low baseline with a mild daytime bump
    double air = lerp(today.air_base, tomorrow.air_base, frac) + 2.0 * std::sin(2.0 * kPi * (m - 6 * 60) / kMinutesPerDay) +
                 std::clamp(air_drift, -2.0, 2.0) + kNoiseSigma[2] * n_air * ns[2];
    air = std::clamp(air, 2.0, 18.0);

    // episodes override the normal curves
    FeatureVector v = {moisture_out, light, air, temp, 0.0};
    for (const auto& ep : episodes) {
      if (!ep.active(t)) continue;
      if (ep.kind == EventKind::cold_snap) v[3] = ep.level;
      if (ep.kind == EventKind::pollution_spike) v[2] = ep.level;
    }
    v[2] = std::round(v[2]);

    // climate logger cadence: sample, then hold
    if (k % config.climate_cadence_minutes == 0) {
      held_temp = round_to(v[3], 0.01);
      const double hum = 84.0 - 52.0 * (held_temp - 60.0) / 36.0 + kNoiseSigma[4] * n_hum * ns[4];
      held_humidity = round_to(std::clamp(hum, 20.0, 88.0), 0.01);
    }
    v[3] = held_temp;
    v[4] = held_humidity;

    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      bool freezing = false;
      for (const auto& ep : episodes) {
        if (ep.kind == EventKind::sensor_freeze && index_of(ep.frozen) == f && ep.active(t)) {
          freezing = true;
        }
      }
      if (freezing && !frozen_active[f]) frozen_value[f] = v[f];
      frozen_active[f] = freezing;
      if (freezing) v[f] = frozen_value[f];
    }

    auto& rec = records[static_cast<std::size_t>(k)];
    rec.time = Timestamp{t};
    rec.values = v;
  }
  return Dataset(std::move(records));
}

ReferenceScenario reference_scenario(std::uint64_t seed) {
  ReferenceScenario s;
  s.config.seed = seed;
  s.config.events = {
      {EventKind::cold_snap, Timestamp::from_civil(2021, 4, 11, 2, 30), 70},
      {EventKind::pollution_spike, Timestamp::from_civil(2021, 4, 12, 13, 10), 40},
  };
  s.test_begin = Timestamp::from_civil(2021, 4, 10);
  s.test_end = Timestamp::from_civil(2021, 4, 13);

  const RuleSet rules = default_ruleset();
  const Dataset all = label(simulate(s.config), rules).dataset;

  std::vector<SensorRecord> window, rest;
  for (const auto& r : all.records()) {
    (r.time >= s.test_begin && r.time < s.test_end ? window : rest).push_back(r);
  }
  s.train = scrub(Dataset(std::move(rest)));

  Dataset test(std::move(window));
  std::uint64_t stream = 100;
  for (Feature f : kFeatureOrder) {
    InjectionSpec spec;
    spec.count = 5;
    spec.kinds = {InjectionKind::spike};
    spec.targets = {f};
    spec.seed = Rng::derive(seed, stream++).next();
    auto injected = inject(test, spec, rules);
    test = std::move(injected.dataset);
    s.injections.insert(s.injections.end(), injected.log.begin(), injected.log.end());
  }
  InjectionSpec stuck;
  stuck.count = 2;
  stuck.kinds = {InjectionKind::stuck};
  stuck.seed = Rng::derive(seed, stream++).next();
  auto injected = inject(test, stuck, rules);
  s.injections.insert(s.injections.end(), injected.log.begin(), injected.log.end());
  std::stable_sort(s.injections.begin(), s.injections.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  s.test = label(injected.dataset, rules).dataset;
  return s;
}

}  // namespace greensentry
