#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "greensentry/error.hpp"
#include "greensentry/labeling.hpp"
#include "oracles.hpp"

using namespace greensentry;

namespace {

SensorRecord rec(std::int64_t minute, FeatureVector v) { return {Timestamp{27'000'000 + minute}, v, std::nullopt}; }

constexpr FeatureVector kMid = {1550, 300, 10, 85, 40};

std::vector<std::string> ids_of(const Dataset& d, std::size_t i) {
  REQUIRE(d[i].label.has_value());
  return d[i].label->rule_ids;
}

}  // namespace

TEST_CASE("default rule set") {
  const RuleSet rules = default_ruleset();
  CHECK(rules.size() == 12);
  const auto* m = rules.find("moisture_low");
  REQUIRE(m);
  CHECK(m->kind == RuleKind::below);
  CHECK(m->threshold == 1300);
  const auto* d = rules.find("temp_diff");
  REQUIRE(d);
  CHECK(d->kind == RuleKind::abs_consecutive_diff_above);
  CHECK(d->threshold == 25);
  CHECK(std::count_if(rules.rules().begin(), rules.rules().end(),
                      [](const AnomalyRule& r) { return r.category == RuleCategory::natural; }) == 3);
  for (Feature f : kFeatureOrder) CHECK(rules.has_bound_for(f));
  CHECK_THROWS_AS(RuleSet({{"a", Feature::light, RuleKind::above, 1, RuleCategory::natural},
                           {"a", Feature::light, RuleKind::below, 0, RuleCategory::natural}}),
                  DataError);
}

TEST_CASE("rule file roundtrip") {
  std::stringstream io;
  write_ruleset(default_ruleset(), io);
  CHECK(io.str().find("temp_diff,temperature_pair,") != std::string::npos);
  CHECK(read_ruleset(io) == default_ruleset());

  std::istringstream custom("# comment\n\nhot,temperature,above,100,potential\n");
  const RuleSet one = read_ruleset(custom);
  REQUIRE(one.size() == 1);
  CHECK(one.rules()[0].threshold == 100);
  std::istringstream bad("hot,temperature,sideways,100,potential\n");
  CHECK_THROWS_AS(read_ruleset(bad), DataError);
}

TEST_CASE("label examples") {
  const RuleSet rules = default_ruleset();
  SUBCASE("cold record") {
    FeatureVector v = kMid;
    v[3] = 53.0;
    const auto d = label(Dataset({rec(0, v)}), rules).dataset;
    CHECK(d[0].label == Label::anomaly({"temp_low"}));
  }
  SUBCASE("mid-range record") {
    const auto d = label(Dataset({rec(0, kMid)}), rules).dataset;
    CHECK(d[0].label == Label::normal());
  }
  SUBCASE("temperature jumps") {
    FeatureVector a = kMid, b = kMid;
    a[3] = 90.0;
    b[3] = 60.0;
    auto d = label(Dataset({rec(0, a), rec(1, b)}), rules).dataset;
    CHECK(d[0].label == Label::normal());
    CHECK(ids_of(d, 1) == std::vector<std::string>{"temp_diff"});
    b[3] = 66.0;
    d = label(Dataset({rec(0, a), rec(1, b)}), rules).dataset;
    CHECK(d[1].label == Label::normal());
    // across a segment break the difference is not evaluated
    b[3] = 60.0;
    d = label(Dataset({rec(0, a), rec(5, b)}), rules).dataset;
    CHECK(d[1].label == Label::normal());
  }
  SUBCASE("bounds are strict") {
    FeatureVector v = {1300, 640, 20, 54, 90};
    CHECK(label(Dataset({rec(0, v)}), rules).dataset[0].label == Label::normal());
    v = {1900, 0, 40, 150, 0};
    CHECK(ids_of(label(Dataset({rec(0, v)}), rules).dataset, 0) == std::vector<std::string>{"air_elevated"});
    v = {1299.99, 640.5, 40.5, 85, 90.1};
    CHECK(ids_of(label(Dataset({rec(0, v)}), rules).dataset, 0) ==
          std::vector<std::string>{"air_elevated", "moisture_low", "light_high", "air_high", "humidity_high"});
  }
  SUBCASE("report counts") {
    FeatureVector cold = kMid;
    cold[3] = 50;
    const auto r = label(Dataset({rec(0, kMid), rec(1, cold), rec(2, kMid)}), rules).report;
    CHECK(r.total == 3);
    CHECK(r.anomalous == 2);  // the cold record and the jump back
    CHECK(r.fire_counts.size() == 12);
    CHECK(r.fire_counts.at("temp_low") == 1);
    CHECK(r.fire_counts.at("temp_diff") == 2);
    CHECK(r.fire_counts.at("humidity_low") == 0);
  }
}

TEST_CASE("label agrees with the naive predicate loop") {
  const RuleSet rules = default_ruleset();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto recs = oracle::random_records(1000, seed);
    const auto expect = oracle::labels(recs, rules);
    for (auto exec : {Execution::serial, Execution::parallel}) {
      const auto got = label(Dataset(recs), rules, exec).dataset;
      std::size_t mismatches = 0;
      for (std::size_t i = 0; i < recs.size(); ++i) mismatches += got[i].label != expect[i];
      CHECK(mismatches == 0);
    }
  }
}

TEST_CASE("label is idempotent") {
  const auto once = label(Dataset(oracle::random_records(500, 9)), default_ruleset()).dataset;
  const auto twice = label(once, default_ruleset()).dataset;
  CHECK(once == twice);
}

TEST_CASE("scrub") {
  const RuleSet rules = default_ruleset();
  SUBCASE("drops anomalies and opens segments") {
    std::vector<SensorRecord> recs;
    for (int m = 0; m < 100; ++m) recs.push_back(rec(m, kMid));
    recs[10].values[0] = 2000;
    recs[50].values[2] = 30;
    recs[99].values[4] = -1;
    const auto labeled = label(Dataset(recs), rules).dataset;
    const auto s = scrub(labeled);
    CHECK(s.size() == 97);
    CHECK(s.anomalous_count() == 0);
    // hand enumeration: minutes 0-9, 11-49, 51-98
    CHECK(s.segment_starts() == std::vector<std::size_t>{0, 10, 49});
  }
  SUBCASE("clean data unchanged") {
    const auto labeled = label(Dataset({rec(0, kMid), rec(1, kMid)}), rules).dataset;
    CHECK(scrub(labeled) == labeled);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(scrub(Dataset({rec(0, kMid)})), DataError);
    FeatureVector bad = kMid;
    bad[1] = 700;
    CHECK_THROWS_AS(scrub(label(Dataset({rec(0, bad)}), rules).dataset), DataError);
  }
}

namespace {

Dataset calm(std::size_t n) {
  std::vector<SensorRecord> recs;
  Rng rng(4);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector v = kMid;
    v[0] += std::round(rng.uniform(-200, 200));
    v[1] += std::round(rng.uniform(-250, 250));
    v[3] += std::round(rng.uniform(-10, 10) * 100) / 100;
    recs.push_back(rec(static_cast<std::int64_t>(i), v));
  }
  return label(Dataset(recs), default_ruleset()).dataset;
}

}  // namespace

TEST_CASE("inject") {
  const RuleSet rules = default_ruleset();
  const Dataset base = calm(2000);
  REQUIRE(base.anomalous_count() == 0);

  SUBCASE("single light spike") {
    InjectionSpec spec;
    spec.count = 1;
    spec.targets = {Feature::light};
    spec.seed = 3;
    const auto r = inject(base, spec, rules);
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].feature == Feature::light);
    CHECK(r.log[0].kind == InjectionKind::spike);
    CHECK(r.log[0].new_value > 640);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (base[i].values != r.dataset[i].values) {
        ++changed;
        CHECK(r.dataset[i].time == r.log[0].time);
        CHECK(r.dataset[i][Feature::light] == r.log[0].new_value);
        CHECK(base[i][Feature::light] == r.log[0].old_value);
      }
    }
    CHECK(changed == 1);
  }
  SUBCASE("count zero is the identity") {
    const auto r = inject(base, InjectionSpec{}, rules);
    CHECK(r.dataset == base);
    CHECK(r.log.empty());
  }
  SUBCASE("deterministic and every injected record is anomalous") {
    InjectionSpec spec;
    spec.count = 12;
    spec.kinds = {InjectionKind::spike, InjectionKind::stuck, InjectionKind::drift};
    spec.seed = 99;
    const auto a = inject(base, spec, rules);
    const auto b = inject(base, spec, rules);
    CHECK(a.dataset == b.dataset);
    std::ostringstream la, lb;
    write_injection_log(a.log, la);
    write_injection_log(b.log, lb);
    CHECK(la.str() == lb.str());
    CHECK(la.str().rfind("timestamp,feature,kind,old_value,new_value\n", 0) == 0);

    const auto relabeled = label(a.dataset, rules).dataset;
    CHECK(relabeled == a.dataset);  // output already carries fresh labels
    std::set<std::int64_t> touched;
    for (const auto& e : a.log) touched.insert(e.time.epoch_minute);
    for (const auto& r : relabeled.records()) {
      if (touched.count(r.time.epoch_minute)) {
        CHECK(r.label->anomalous);
        const auto own = oracle::fired(relabeled.records(),
                                       static_cast<std::size_t>(r.time.epoch_minute - relabeled[0].time.epoch_minute),
                                       rules);
        CHECK_FALSE(own.empty());
      }
    }
    const Dataset different = inject(base, InjectionSpec{12, spec.kinds, spec.targets, 100}, rules).dataset;
    CHECK_FALSE(different == a.dataset);
  }
  SUBCASE("run lengths follow the spec") {
    InjectionSpec spec;
    spec.count = 6;
    spec.kinds = {InjectionKind::stuck};
    spec.seed = 5;
    const auto r = inject(base, spec, rules);
    CHECK(r.log.size() >= 6 * 5);
    CHECK(r.log.size() <= 6 * 15);
    spec.kinds = {InjectionKind::drift};
    const auto d = inject(base, spec, rules);
    CHECK(d.log.size() >= 6 * 20);
    CHECK(d.log.size() <= 6 * 60);
  }
  SUBCASE("errors") {
    InjectionSpec spec;
    spec.count = 1;
    spec.targets = {Feature::light};
    RuleSet no_light({{"t", Feature::temperature, RuleKind::above, 100, RuleCategory::natural}});
    CHECK_THROWS_AS(inject(base, spec, no_light), DataError);
    spec.count = base.size() + 1;
    CHECK_THROWS_AS(inject(base, spec, rules), DataError);
  }
}
