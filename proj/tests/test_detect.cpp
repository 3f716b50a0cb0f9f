#include <doctest.h>

#include <cmath>
#include <sstream>

#include "greensentry/detect.hpp"
#include "greensentry/error.hpp"
#include "greensentry/model_state.hpp"
#include "greensentry/pipeline.hpp"
#include "oracles.hpp"

using namespace greensentry;

TEST_CASE("calibrate_threshold") {
  const auto t = calibrate_threshold({1, 2, 3, 4, 5, 6, 7}, 5);
  CHECK(t.value == 5.0);
  CHECK(t.k == 5);
  CHECK(t.source_count == 7);
  CHECK(calibrate_threshold(std::vector<double>(9, 0.25), 5).value == 0.25);
  CHECK(calibrate_threshold({3, 1, 3, 3, 2}, 2).value == 3.0);  // ties count by multiplicity
  CHECK_THROWS_WITH_AS(calibrate_threshold({1, 2, 3}, 5), "insufficient validation data", DataError);

  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(5 + rng.below(200));
    for (auto& x : v) x = rng.bernoulli(0.2) ? std::round(rng.uniform(0, 4)) : rng.uniform(0, 1e-3);
    const int k = static_cast<int>(rng.between(1, 5));
    REQUIRE(calibrate_threshold(v, k).value == oracle::topk_mean(v, k));
  }
}

TEST_CASE("classify") {
  const Threshold t{0.5, 5, 10};
  CHECK(classify({0.5}, t) == std::vector<Verdict>{Verdict::normal});
  CHECK(classify({}, t).empty());
  Rng rng(2);
  std::vector<double> losses(500);
  for (auto& l : losses) l = std::round(rng.uniform(0, 1) * 20) / 20;
  const auto v = classify(losses, t);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    CHECK((v[i] == Verdict::anomalous) == (losses[i] > 0.5));
  }
  // raising the threshold never turns a normal point anomalous
  const auto higher = classify(losses, Threshold{0.7, 5, 10});
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (v[i] == Verdict::normal) CHECK(higher[i] == Verdict::normal);
  }
}

TEST_CASE("confusion and metrics") {
  using V = Verdict;
  SUBCASE("perfect agreement") {
    std::vector<V> l(10, V::normal);
    l[1] = l[4] = l[8] = V::anomalous;
    const auto cm = confusion(l, l);
    CHECK(cm == ConfusionMatrix{3, 7, 0, 0});
  }
  SUBCASE("all predicted normal") {
    std::vector<V> l(10, V::normal);
    l[0] = l[9] = V::anomalous;
    CHECK(confusion(std::vector<V>(10, V::normal), l).fn == 2);
  }
  SUBCASE("randomized counting oracle") {
    Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<V> p(rng.below(50)), l(p.size());
      for (auto& x : p) x = rng.bernoulli(0.3) ? V::anomalous : V::normal;
      for (auto& x : l) x = rng.bernoulli(0.3) ? V::anomalous : V::normal;
      REQUIRE(confusion(p, l) == oracle::count(p, l));
    }
  }
  SUBCASE("length mismatch") { CHECK_THROWS_AS(confusion({V::normal}, {}), DataError); }

  SUBCASE("perfect classifier metrics") {
    const auto m = metrics({1, 1, 0, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.undefined.empty());
  }
  SUBCASE("no positives predicted") {
    const auto m = metrics({0, 8, 0, 2});
    CHECK(m.accuracy == 0.8);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.undefined == std::set<std::string>{"precision", "f1"});
  }
  SUBCASE("worked example") {
    const auto m = metrics({8, 89, 2, 1});
    CHECK(m.accuracy == 97.0 / 100.0);
    CHECK(m.precision == 0.8);
    CHECK(m.recall == 8.0 / 9.0);
    CHECK(std::fabs(m.f1 - 2 * (0.8 * 8.0 / 9.0) / (0.8 + 8.0 / 9.0)) <= 1e-15);
  }
  SUBCASE("identities on random matrices") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
      ConfusionMatrix cm{rng.below(20) + 1, rng.below(100), rng.below(20) + 1, rng.below(20)};
      const auto m = metrics(cm);
      CHECK(m.recall == static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn));
      CHECK(std::fabs(m.accuracy * static_cast<double>(cm.total()) - static_cast<double>(cm.tp + cm.tn)) <= 1e-9);
      CHECK(std::fabs(m.f1 - 2 / (1 / m.precision + 1 / m.recall)) <= 1e-12);
    }
  }
  SUBCASE("empty matrix") { CHECK_THROWS_AS(metrics({}), DataError); }
}

TEST_CASE("loss plot file") {
  const std::vector<Timestamp> ts = {Timestamp{100}, Timestamp{101}, Timestamp{102}};
  const std::vector<double> losses = {0.1, 1.0 / 3.0, 2.5e-7};
  const std::vector<Verdict> labels = {Verdict::normal, Verdict::anomalous, Verdict::normal};
  std::stringstream io;
  write_loss_plot(io, ts, losses, labels, Threshold{0.2, 5, 9});
  const std::string text = io.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "timestamp,loss,label,threshold");
  while (std::getline(lines, line)) CHECK(line.substr(line.rfind(',') + 1) == "0.2");
  CHECK(read_loss_plot(io) == losses);
  CHECK_THROWS_AS(write_loss_plot(io, ts, {0.1}, labels, Threshold{}), DataError);
}

namespace {

// A scaler that maps values straight through and a network that is exact on
// the unit cube: relu hidden identity, linear identity output.
ModelState identity_state(double threshold) {
  ModelState s;
  s.params = init(ModelConfig::custom(5, {5}, Activation::relu, Activation::linear), 0);
  for (auto& l : s.params.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    for (std::size_t j = 0; j < 5; ++j) l.w(j, j) = 1.0;
  }
  s.scaler.min.fill(0.0);
  s.scaler.max.fill(1.0);
  s.threshold = Threshold{threshold, 5, 5};
  return s;
}

}  // namespace

TEST_CASE("timed_detect") {
  std::vector<SensorRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back({Timestamp{i}, {0.1, 0.2, 0.3, 0.4, 0.5}, Label::normal()});
  const Dataset d(recs);
  const auto r = timed_detect(identity_state(1e-3), d);
  CHECK(r.metrics.accuracy == 1.0);
  CHECK(r.confusion.tn == 50);
  CHECK(r.per_point_seconds > 0);
  CHECK(std::isfinite(r.per_point_seconds));
  CHECK(r.metrics.undefined.count("recall") == 1);
  CHECK(r.timestamps.size() == 50);
  CHECK(std::fabs(r.reconstructed[7][4] - 0.5) <= 1e-12);
  CHECK(report_json(r, false).find("timing") == std::string::npos);
  CHECK(report_json(r).find("per_point_seconds") != std::string::npos);

  auto uncalibrated = identity_state(1e-3);
  uncalibrated.threshold.reset();
  CHECK_THROWS_WITH_AS(timed_detect(uncalibrated, d), "model not calibrated", DataError);
  CHECK_THROWS_AS(timed_detect(identity_state(1e-3), Dataset({{Timestamp{0}, {}, std::nullopt}})), DataError);
}

TEST_CASE("model state json") {
  const Dataset normal = [] {
    std::vector<SensorRecord> recs;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      recs.push_back({Timestamp{i},
                      {rng.uniform(1400, 1800), rng.uniform(0, 600), rng.uniform(2, 18), rng.uniform(60, 90),
                       rng.uniform(30, 80)},
                      Label::normal()});
    }
    return Dataset(recs);
  }();
  PipelineOptions o = PipelineOptions::for_profile(Profile::tuned, 5);
  o.model = ModelConfig::funnel(16);
  o.train.epochs = 2;
  const TrainOutcome t = train_pipeline(normal, o);
  REQUIRE(t.state.threshold.has_value());
  CHECK(t.train_rows == 150);
  CHECK(t.validation_rows == 50);
  CHECK(t.state.threshold->source_count == 50);

  std::stringstream io;
  save_model(t.state, io);
  const std::string text = io.str();
  const ModelState back = load_model(io);
  CHECK(back == t.state);
  std::ostringstream again;
  save_model(back, again);
  CHECK(again.str() == text);

  auto no_threshold = t.state;
  no_threshold.threshold.reset();
  std::stringstream io2;
  save_model(no_threshold, io2);
  CHECK_FALSE(load_model(io2).threshold.has_value());

  std::istringstream garbage("{\"format_version\": 2}");
  CHECK_THROWS_AS(load_model(garbage), DataError);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(truncated), DataError);
  std::string bad_shape = text;
  bad_shape.replace(bad_shape.find("\"fan_in\": 5"), 11, "\"fan_in\": 6");
  std::istringstream shape(bad_shape);
  CHECK_THROWS_AS(load_model(shape), DataError);
}

TEST_CASE("pipeline profiles") {
  const auto paper = PipelineOptions::for_profile(Profile::paper, 7);
  CHECK(paper.train.epochs == 60);
  CHECK(paper.train.batch_size == 8);
  CHECK(paper.train.learning_rate == 1e-6);
  CHECK(paper.train.optimizer == Optimizer::sgd);
  CHECK(paper.split_ratio == 0.75);
  CHECK(paper.threshold_k == 5);
  CHECK(paper.model.widths() == ModelConfig::funnel(256).widths());
  const auto tuned = PipelineOptions::for_profile(Profile::tuned, 7);
  CHECK(tuned.train.optimizer == Optimizer::adam);
  CHECK(tuned.train.learning_rate == 1e-3);
  CHECK(tuned.init_seed == paper.init_seed);
  CHECK_FALSE(PipelineOptions::for_profile(Profile::tuned, 8).init_seed == tuned.init_seed);
  CHECK(parse_profile("paper") == Profile::paper);
  CHECK_THROWS(parse_profile("fast"));
}
