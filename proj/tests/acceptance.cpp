// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [--work-dir DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "greensentry/cli.hpp"
#include "greensentry/detect.hpp"
#include "greensentry/labeling.hpp"
#include "greensentry/pipeline.hpp"
#include "greensentry/preprocess.hpp"
#include "greensentry/simulate.hpp"
#include "greensentry/text.hpp"
#include "oracles.hpp"

using namespace greensentry;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("criterion %d %-22s %s  %s\n", id, name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct PlotRow {
  std::string time;
  double loss;
  bool anomalous;
};

std::vector<PlotRow> read_plot(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<PlotRow> rows;
  while (std::getline(in, line)) {
    const auto c = text::split(line, ',');
    rows.push_back({std::string(c[0]), *text::to_double(c[1]), c[2] == "anomalous"});
  }
  return rows;
}

// 1. analytic gradients vs central differences on random toy networks
void gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20210416);
  const Activation hidden[] = {Activation::relu, Activation::sigmoid, Activation::tanh};
  const Activation output[] = {Activation::sigmoid, Activation::linear};
  double worst = 0;
  std::size_t params = 0;
  const int configs = 24;
  for (int i = 0; i < configs; ++i) {
    const int dim = static_cast<int>(rng.between(1, 8));
    std::vector<int> widths(static_cast<std::size_t>(rng.between(1, 4)));
    for (auto& w : widths) w = static_cast<int>(rng.between(1, 8));
    const auto cfg = ModelConfig::custom(dim, widths, hidden[i % 3], output[(i / 3) % 2]);
    auto p = init(cfg, rng.next());
    // nonzero biases keep relu pre-activations off the kink at exactly 0
    for (auto& l : p.layers) {
      for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
    }
    std::vector<double> batch(static_cast<std::size_t>(dim) * static_cast<std::size_t>(rng.between(1, 8)));
    for (auto& v : batch) v = rng.uniform(0.0, 1.0);
    const auto r = oracle::check_gradients(p, batch, 1e-5);
    worst = std::max(worst, r.worst);
    params += r.checked;
  }
  const double took = seconds_since(t0);
  verdict(1, "gradient-check", worst <= 1e-4 && took < 30.0,
          std::to_string(configs) + " configs, " + std::to_string(params) + " params, worst rel err " +
              fmt("%.2e", worst) + ", " + fmt("%.2f", took) + " s");
}

// 2. exact agreement with naive oracles
void oracle_equivalence() {
  std::size_t label_mismatch = 0, calib_mismatch = 0, cm_mismatch = 0;
  const RuleSet rules = default_ruleset();
  const auto recs = oracle::random_records(1000, 77);
  const auto expect = oracle::labels(recs, rules);
  for (auto exec : {Execution::serial, Execution::parallel}) {
    const auto got = label(Dataset(recs), rules, exec).dataset;
    for (std::size_t i = 0; i < recs.size(); ++i) label_mismatch += got[i].label != expect[i];
  }
  Rng rng(78);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(5 + rng.below(500));
    for (auto& x : v) x = rng.bernoulli(0.1) ? std::round(rng.uniform(0, 3)) : rng.uniform(0, 0.01);
    const int k = static_cast<int>(rng.between(1, 5));
    calib_mismatch += calibrate_threshold(v, k).value != oracle::topk_mean(v, k);

    std::vector<Verdict> p(1 + rng.below(100)), l(p.size());
    for (auto& x : p) x = rng.bernoulli(0.2) ? Verdict::anomalous : Verdict::normal;
    for (auto& x : l) x = rng.bernoulli(0.2) ? Verdict::anomalous : Verdict::normal;
    const auto cm = confusion(p, l);
    const auto m = metrics(cm);
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
    bool ok = cm == oracle::count(p, l) && m.accuracy == (tp + tn) / (tp + tn + fp + fn);
    if (tp + fp > 0) ok = ok && m.precision == tp / (tp + fp);
    if (tp + fn > 0) ok = ok && m.recall == tp / (tp + fn);
    cm_mismatch += !ok;
  }
  const auto worked = metrics({8, 89, 2, 1});
  const bool worked_ok = worked.precision == 0.8 && worked.recall == 8.0 / 9.0 && worked.accuracy == 0.97 &&
                         std::fabs(worked.f1 - 2 * (0.8 * 8.0 / 9.0) / (0.8 + 8.0 / 9.0)) <= 1e-15;
  verdict(2, "oracle-equivalence", label_mismatch == 0 && calib_mismatch == 0 && cm_mismatch == 0 && worked_ok,
          "label " + std::to_string(label_mismatch) + ", calibrate " + std::to_string(calib_mismatch) +
              ", confusion/metrics " + std::to_string(cm_mismatch) + " mismatches; worked example " +
              (worked_ok ? "ok" : "wrong"));
}

// 3. min-max scaler properties on the reference training matrix
void scaler_properties(const ReferenceScenario& s) {
  const FeatureMatrix m = to_matrix(s.train);
  const ScalerParams p = fit_minmax(m);
  const FeatureMatrix t = transform(p, m);
  const FeatureMatrix back = inverse_transform(p, t);
  double worst = 0;
  bool in_range = true, endpoints = true;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double lo = 1, hi = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      lo = std::min(lo, t.rows[i][f]);
      hi = std::max(hi, t.rows[i][f]);
      worst = std::max(worst, std::fabs(back.rows[i][f] - m.rows[i][f]) / std::max(std::fabs(m.rows[i][f]), 1.0));
    }
    in_range = in_range && lo >= 0 && hi <= 1;
    endpoints = endpoints && (p.degenerate[f] || (lo == 0.0 && hi == 1.0));
  }
  ScalerParams moisture;
  moisture.min = {1100, 0, 0, 0, 0};
  moisture.max = {2000, 1, 1, 1, 1};
  FeatureMatrix one;
  one.rows = {{1550, 0, 0, 0, 0}};
  one.keys = {Timestamp{0}};
  const double mid = transform(moisture, one).rows[0][0];
  verdict(3, "scaler-properties", worst <= 1e-9 && in_range && endpoints && mid == 0.5,
          "roundtrip rel err " + fmt("%.1e", worst) + ", range " + (in_range ? "[0,1]" : "violated") +
              ", endpoints " + (endpoints ? "attained" : "missing") + ", 1550 -> " + fmt("%g", mid));
}

std::string strip_timing(const std::string& text) {
  json j = json::parse(text);
  j.erase("timing");
  return j.dump();
}

int reproduce(const fs::path& out, const std::string& profile = "tuned") {
  std::ostringstream o, e;
  const int rc = cli::run({"reproduce", "--seed", "7", "--profile", profile, "--out", out.string()}, o, e);
  if (rc != 0) std::cerr << e.str();
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "greensentry_acceptance";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--work-dir") work = argv[i + 1];
  }
  fs::remove_all(work);
  fs::create_directories(work);

  gradient_check();
  oracle_equivalence();
  const ReferenceScenario scenario = reference_scenario(7);
  scaler_properties(scenario);

  const fs::path run_a = work / "run_a", run_b = work / "run_b";
  const int rc_a = reproduce(run_a);
  const int rc_b = reproduce(run_b);

  // 4. determinism of the whole reproduce command
  {
    std::vector<std::string> differing;
    for (const char* f : {"train.csv", "test.csv", "rules.txt", "injection_log.csv", "model.json", "plot_losses.csv",
                          "plot_reconstruction.csv"}) {
      if (slurp(run_a / f) != slurp(run_b / f) || slurp(run_a / f).empty()) differing.push_back(f);
    }
    if (rc_a != 0 || rc_b != 0 ||
        strip_timing(slurp(run_a / "evaluation_report.json")) != strip_timing(slurp(run_b / "evaluation_report.json"))) {
      differing.push_back("evaluation_report.json");
    }
    std::string detail = differing.empty() ? "datasets, model, report and plots byte-identical" : "differs:";
    for (const auto& d : differing) detail += " " + d;
    verdict(4, "determinism", differing.empty(), detail);
  }
  if (rc_a != 0) {
    for (int c = 5; c <= 8; ++c) verdict(c, "reproduce", false, "reproduce exited " + std::to_string(rc_a));
    return 1;
  }

  const json report = json::parse(slurp(run_a / "evaluation_report.json"));
  const json train_report = json::parse(slurp(run_a / "train_report.json"));
  const auto plot = read_plot(run_a / "plot_losses.csv");
  const double threshold = report["threshold"]["value"].get<double>();

  // 5. detection quality on the reference scenario
  {
    const double acc = report["metrics"]["accuracy"], rec = report["metrics"]["recall"], f1 = report["metrics"]["f1"];
    double sum_a = 0, sum_n = 0;
    std::size_t n_a = 0, n_n = 0;
    for (const auto& r : plot) {
      (r.anomalous ? sum_a : sum_n) += r.loss;
      (r.anomalous ? n_a : n_n) += 1;
    }
    const double mean_a = n_a ? sum_a / static_cast<double>(n_a) : 0, mean_n = n_n ? sum_n / static_cast<double>(n_n) : 0;
    const auto& cm = report["confusion"];
    verdict(5, "detection-quality", acc >= 0.95 && rec >= 0.90 && f1 >= 0.90 && n_a > 0 && mean_a > mean_n,
            "accuracy " + fmt("%.4f", acc) + " recall " + fmt("%.4f", rec) + " f1 " + fmt("%.4f", f1) + " (tp " +
                cm["tp"].dump() + " fp " + cm["fp"].dump() + " fn " + cm["fn"].dump() + " tn " + cm["tn"].dump() +
                "); mean loss anomalous " + fmt("%.3e", mean_a) + " > normal " + fmt("%.3e", mean_n));
  }

  // 6. performance envelope
  {
    const double train_s = train_report["timing"]["wall_time_seconds"];
    const double total = report["timing"]["total_seconds"], per = report["timing"]["per_point_seconds"];
    const std::size_t rows = train_report["train_rows"].get<std::size_t>() + train_report["validation_rows"].get<std::size_t>();
    verdict(6, "performance", train_s <= 300 && total <= 1.0 && per <= 1e-3,
            "training " + fmt("%.1f", train_s) + " s on " + std::to_string(rows) + " normal rows; detection " +
                fmt("%.4f", total) + " s total, " + fmt("%.4f", per * 1e3) + " ms/point over " +
                report["points"].dump() + " points");
  }

  // 7. paper-literal hyperparameters
  {
    const fs::path run_p = work / "run_paper";
    const int rc = reproduce(run_p, "paper");
    bool ok = rc == 0;
    std::string detail = "reproduce --profile paper exited " + std::to_string(rc);
    if (ok) {
      const json tr = json::parse(slurp(run_p / "train_report.json"));
      const json manifest = json::parse(slurp(run_p / "manifest.json"));
      const auto& eff = manifest["effective_config"];
      bool finite = true;
      for (const auto& v : tr["train_loss"]) finite = finite && v.is_number() && std::isfinite(v.get<double>());
      for (const auto& v : tr["validation_loss"]) finite = finite && v.is_number() && std::isfinite(v.get<double>());
      ok = finite && tr["train_loss"].size() == 60 && tr["validation_loss"].size() == 60 && eff["train.epochs"] == "60" &&
           eff["train.batch_size"] == "8" && eff["train.learning_rate"] == "1e-06" && eff["train.optimizer"] == "sgd";
      detail = std::to_string(tr["train_loss"].size()) + " epochs (sgd, batch 8, lr 1e-6), losses " +
               (finite ? "finite" : "NOT finite") + ", final validation loss " +
               fmt("%.4e", tr["validation_loss"].back().get<double>());
    }
    verdict(7, "paper-profile", ok, detail);
  }

  // 8. injected spikes: labeled anomalous and detected per feature
  {
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < plot.size(); ++i) row_of[plot[i].time] = i;
    std::map<Feature, std::pair<std::size_t, std::size_t>> hits;  // detected, total
    bool all_labeled = true;
    const RuleSet rules = default_ruleset();
    for (const auto& e : scenario.injections) {
      if (e.kind != InjectionKind::spike) continue;
      const auto it = row_of.find(format_iso(e.time));
      if (it == row_of.end()) {
        all_labeled = false;
        continue;
      }
      const std::size_t i = it->second;
      all_labeled = all_labeled && plot[i].anomalous && scenario.test[i].time == e.time &&
                    !fired_rules(scenario.test, i, rules).empty();
      auto& h = hits[e.feature];
      h.second += 1;
      h.first += plot[i].loss > threshold;
    }
    bool ok = all_labeled;
    std::string detail;
    for (Feature f : kFeatureOrder) {
      if (!rules.has_bound_for(f)) continue;
      const auto [det, tot] = hits[f];
      const double recall = tot ? static_cast<double>(det) / static_cast<double>(tot) : 0.0;
      ok = ok && tot > 0 && recall >= 0.8;
      detail += std::string(feature_name(f)) + " " + std::to_string(det) + "/" + std::to_string(tot) + " ";
    }
    detail += all_labeled ? "(all labeled anomalous)" : "(some spikes NOT labeled anomalous)";
    verdict(8, "injection-coverage", ok, detail);
  }

  std::printf("%s\n", failures ? "ACCEPTANCE FAILED" : "ALL CRITERIA PASSED");
  return failures ? 1 : 0;
}
