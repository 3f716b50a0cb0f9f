#include "greensentry/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "greensentry/config.hpp"
#include "greensentry/detect.hpp"
#include "greensentry/error.hpp"
#include "greensentry/labeling.hpp"
#include "greensentry/model_state.hpp"
#include "greensentry/pipeline.hpp"
#include "greensentry/sensor_data.hpp"
#include "greensentry/simulate.hpp"
#include "greensentry/text.hpp"

namespace greensentry::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 7;
constexpr const char* kSeedEnv = "GREENSENTRY_SEED";
constexpr std::size_t kDefaultInjectCount = 10;

// Values shared by every subcommand; empty/unset means "not given".
struct CommonFlags {
  std::string config_path;
  std::string seed;
  std::string out_dir = ".";
  std::string rules_path;
  std::string profile;
  bool scrub = false;
};

// Everything one invocation resolved, echoed into manifest.json.
struct Run {
  std::string command;
  KeyValueConfig config;  // file values with flag overrides applied
  std::uint64_t seed = kDefaultSeed;
  std::string seed_source = "default";
  std::map<std::string, std::string> effective;
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::vector<std::string> artifacts;
  fs::path out_dir;
};

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += sep;
    s += parts[i];
  }
  return s;
}

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  KeyValueConfig tmp;
  tmp.set(source, text);
  return *tmp.get_u64(source);
}

Run resolve(const std::string& command, const CommonFlags& flags) {
  Run run;
  run.command = command;
  if (!flags.config_path.empty()) {
    run.config = KeyValueConfig::load(flags.config_path);
    run.inputs[flags.config_path] = file_digest(flags.config_path);
  }
  if (!flags.profile.empty()) run.config.set("profile", flags.profile);
  if (!flags.seed.empty()) {
    run.seed = parse_seed(flags.seed, "--seed");
    run.seed_source = "flag";
  } else if (run.config.contains("seed")) {
    run.seed = *run.config.get_u64("seed");
    run.seed_source = "config";
  } else if (const char* env = std::getenv(kSeedEnv); env && *env) {
    run.seed = parse_seed(env, kSeedEnv);
    run.seed_source = "environment";
  }
  run.out_dir = flags.out_dir;
  std::error_code ec;
  fs::create_directories(run.out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + flags.out_dir + "': " + ec.message());
  return run;
}

void write_file(Run& run, const std::string& name, const std::function<void(std::ostream&)>& body) {
  const fs::path path = run.out_dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw DataError("write failed for '" + path.string() + "'");
  run.artifacts.push_back(name);
}

std::ifstream open_input(Run& run, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input '" + path + "'");
  run.inputs[path] = file_digest(path);
  return in;
}

Dataset read_dataset(Run& run, const std::string& path) {
  auto in = open_input(run, path);
  return read_dataset_csv(in);
}

RuleSet load_rules(Run& run, const std::string& path) {
  if (path.empty()) {
    run.effective["rules"] = "default";
    return default_ruleset();
  }
  auto in = open_input(run, path);
  run.effective["rules"] = path;
  return read_ruleset(in);
}

void write_manifest(Run& run) {
  json inputs = json::object();
  for (const auto& [path, digest] : run.inputs) inputs[path] = digest;
  json doc = {
      {"command", run.command},
      {"seed", run.seed},
      {"seed_source", run.seed_source},
      {"effective_config", run.effective},
      {"inputs", inputs},
      {"artifacts", run.artifacts},
  };
  const fs::path path = run.out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << '\n';
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

// ---- config -> typed settings ---------------------------------------------

std::vector<std::string> list(const std::string& csv) {
  std::vector<std::string> out;
  for (auto part : text::split(csv, ',')) {
    part = text::trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

SimConfig sim_config(Run& run) {
  const auto& c = run.config;
  SimConfig s;
  s.seed = run.seed;
  if (auto v = c.get("sim.start")) s.start = parse_timestamp(*v);
  if (auto v = c.get_int("sim.days")) s.days = static_cast<int>(*v);
  if (auto v = c.get("sim.irrigation_times")) {
    s.irrigation_times.clear();
    for (const auto& m : list(*v)) {
      const auto n = text::to_int(m);
      if (!n) throw UsageError("sim.irrigation_times: '" + m + "' is not a minute of day");
      s.irrigation_times.push_back(static_cast<int>(*n));
    }
  }
  for (Feature f : kFeatureOrder) {
    if (auto v = c.get_double("sim.noise." + std::string(feature_name(f)))) s.noise_scale[index_of(f)] = *v;
  }
  if (auto v = c.get_double("sim.noise_scale")) s.noise_scale.fill(*v);
  if (auto v = c.get_double("sim.p_cold_snap")) s.p_cold_snap = *v;
  if (auto v = c.get_double("sim.p_pollution_spike")) s.p_pollution_spike = *v;
  if (auto v = c.get_double("sim.p_sensor_freeze")) s.p_sensor_freeze = *v;
  if (auto v = c.get_int("sim.climate_cadence_minutes")) s.climate_cadence_minutes = static_cast<int>(*v);
  s.validate();

  auto& e = run.effective;
  e["sim.start"] = format_iso(s.start);
  e["sim.days"] = std::to_string(s.days);
  e["sim.seed"] = std::to_string(s.seed);
  std::vector<std::string> times;
  for (int m : s.irrigation_times) times.push_back(std::to_string(m));
  e["sim.irrigation_times"] = join(times, ',');
  for (Feature f : kFeatureOrder) e["sim.noise." + std::string(feature_name(f))] = text::shortest(s.noise_scale[index_of(f)]);
  e["sim.p_cold_snap"] = text::shortest(s.p_cold_snap);
  e["sim.p_pollution_spike"] = text::shortest(s.p_pollution_spike);
  e["sim.p_sensor_freeze"] = text::shortest(s.p_sensor_freeze);
  e["sim.climate_cadence_minutes"] = std::to_string(s.climate_cadence_minutes);
  return s;
}

PipelineOptions pipeline_options(Run& run) {
  const auto& c = run.config;
  const Profile profile = parse_profile(c.get("profile").value_or("tuned"));
  PipelineOptions o = PipelineOptions::for_profile(profile, run.seed);
  if (auto v = c.get_int("model.node_size")) o.model = ModelConfig::funnel(static_cast<int>(*v));
  if (auto v = c.get("model.hidden_activation")) o.model.hidden_activation = parse_activation(*v);
  if (auto v = c.get("model.output_activation")) o.model.output_activation = parse_activation(*v);
  if (auto v = c.get_int("train.epochs")) o.train.epochs = static_cast<int>(*v);
  if (auto v = c.get_int("train.batch_size")) o.train.batch_size = static_cast<int>(*v);
  if (auto v = c.get_double("train.learning_rate")) o.train.learning_rate = *v;
  if (auto v = c.get("train.optimizer")) o.train.optimizer = parse_optimizer(*v);
  if (auto v = c.get_double("split.ratio")) o.split_ratio = *v;
  if (auto v = c.get("split.mode")) {
    if (*v == "chronological") {
      o.split_mode = SplitMode::chronological;
    } else if (*v == "shuffled") {
      o.split_mode = SplitMode::shuffled;
    } else {
      throw UsageError("split.mode must be chronological or shuffled");
    }
  }
  if (auto v = c.get_int("detect.k")) o.threshold_k = static_cast<int>(*v);
  o.model.validate();
  o.train.validate();

  auto& e = run.effective;
  e["profile"] = std::string(profile_name(profile));
  std::vector<std::string> widths;
  for (int w : o.model.widths()) widths.push_back(std::to_string(w));
  e["model.widths"] = join(widths, '-');
  e["model.node_size"] = std::to_string(o.model.node_size);
  e["model.hidden_activation"] = std::string(activation_name(o.model.hidden_activation));
  e["model.output_activation"] = std::string(activation_name(o.model.output_activation));
  e["model.init_seed"] = std::to_string(o.init_seed);
  e["train.epochs"] = std::to_string(o.train.epochs);
  e["train.batch_size"] = std::to_string(o.train.batch_size);
  e["train.learning_rate"] = text::shortest(o.train.learning_rate);
  e["train.optimizer"] = std::string(optimizer_name(o.train.optimizer));
  e["train.seed"] = std::to_string(o.train.seed);
  e["split.ratio"] = text::shortest(o.split_ratio);
  e["split.mode"] = o.split_mode == SplitMode::chronological ? "chronological" : "shuffled";
  e["split.seed"] = std::to_string(o.split_seed);
  e["detect.k"] = std::to_string(o.threshold_k);
  return o;
}

InjectionSpec injection_spec(Run& run) {
  const auto& c = run.config;
  InjectionSpec s;
  s.seed = run.seed;
  s.count = kDefaultInjectCount;
  if (auto v = c.get_u64("inject.seed")) s.seed = *v;
  if (auto v = c.get_int("inject.count")) {
    if (*v < 0) throw UsageError("inject.count must be >= 0");
    s.count = static_cast<std::size_t>(*v);
  }
  if (auto v = c.get("inject.kinds")) {
    s.kinds.clear();
    for (const auto& k : list(*v)) s.kinds.push_back(parse_injection_kind(k));
  }
  if (auto v = c.get("inject.targets")) {
    s.targets.clear();
    for (const auto& f : list(*v)) s.targets.push_back(parse_feature(f));
  }
  auto& e = run.effective;
  e["inject.count"] = std::to_string(s.count);
  std::vector<std::string> kinds, targets;
  for (auto k : s.kinds) kinds.emplace_back(injection_kind_name(k));
  for (auto f : s.targets) targets.emplace_back(feature_name(f));
  e["inject.kinds"] = join(kinds, ',');
  e["inject.targets"] = join(targets, ',');
  e["inject.seed"] = std::to_string(s.seed);
  return s;
}

// ---- report documents -------------------------------------------------------

std::string label_report_json(const LabelReport& r) {
  json doc = {{"total", r.total}, {"anomalous", r.anomalous}, {"fire_counts", r.fire_counts}};
  return doc.dump(2) + "\n";
}

std::string train_report_json(const TrainOutcome& t) {
  json doc = {
      {"epochs", t.report.train_loss.size()},
      {"train_loss", t.report.train_loss},
      {"validation_loss", t.report.validation_loss},
      {"train_rows", t.train_rows},
      {"validation_rows", t.validation_rows},
      {"threshold", t.state.threshold ? json(t.state.threshold->value) : json(nullptr)},
      {"timing", {{"wall_time_seconds", t.report.wall_time_seconds}}},
  };
  return doc.dump(2) + "\n";
}

void write_detection(Run& run, const EvaluationReport& report) {
  write_file(run, "evaluation_report.json", [&](std::ostream& o) { o << report_json(report); });
  write_file(run, "plot_losses.csv", [&](std::ostream& o) {
    write_loss_plot(o, report.timestamps, report.losses, report.labels, report.threshold);
  });
}

void write_reconstruction(Run& run, const EvaluationReport& report, const Dataset& dataset) {
  std::vector<FeatureVector> original;
  original.reserve(dataset.size());
  for (const auto& r : dataset.records()) original.push_back(r.values);
  write_file(run, "plot_reconstruction.csv", [&](std::ostream& o) {
    write_reconstruction_plot(o, report.timestamps, original, report.reconstructed);
  });
}

void summarize(std::ostream& out, const EvaluationReport& r) {
  out << "points " << r.losses.size() << "  tp " << r.confusion.tp << "  tn " << r.confusion.tn << "  fp "
      << r.confusion.fp << "  fn " << r.confusion.fn << '\n'
      << std::setprecision(4) << "accuracy " << r.metrics.accuracy << "  precision " << r.metrics.precision
      << "  recall " << r.metrics.recall << "  f1 " << r.metrics.f1 << '\n';
  if (r.total_seconds > 0.0) out << "detection " << r.total_seconds << " s (" << r.per_point_seconds * 1e3 << " ms/point)\n";
}

// ---- subcommands -------------------------------------------------------------

int cmd_simulate(const CommonFlags& flags, std::ostream& out) {
  Run run = resolve("simulate", flags);
  const SimConfig sim = sim_config(run);
  const Dataset data = simulate(sim);
  write_file(run, "dataset.csv", [&](std::ostream& o) { write_csv(data, o); });
  write_manifest(run);
  out << "simulated " << data.size() << " records -> " << (run.out_dir / "dataset.csv").string() << '\n';
  return kOk;
}

struct IngestFlags {
  std::map<Feature, std::string> paths;
  int max_fill = 10;
};

int cmd_ingest(const CommonFlags& flags, const IngestFlags& in, std::ostream& out) {
  Run run = resolve("ingest", flags);
  int max_fill = in.max_fill;
  if (auto v = run.config.get_int("ingest.max_fill")) max_fill = static_cast<int>(*v);
  run.effective["ingest.max_fill"] = std::to_string(max_fill);

  std::vector<RawSeries> filled;
  json report = json::object();
  for (Feature f : kFeatureOrder) {
    const auto it = in.paths.find(f);
    if (it == in.paths.end() || it->second.empty()) {
      throw UsageError("ingest: missing --" + std::string(feature_name(f)) + " <csv>");
    }
    auto stream = open_input(run, it->second);
    const IngestResult raw = ingest_csv(stream, f);
    FillResult fill = forward_fill(raw.series, 1, max_fill);
    report[std::string(feature_name(f))] = {{"rows", raw.series.samples.size()},
                                            {"duplicates", raw.duplicate_count},
                                            {"out_of_order", raw.out_of_order_count},
                                            {"filled_rows", fill.series.samples.size()},
                                            {"segment_breaks", fill.segment_breaks.size()}};
    filled.push_back(std::move(fill.series));
  }
  const MergeResult merged = align_merge(filled);
  for (Feature f : kFeatureOrder) {
    report[std::string(feature_name(f))]["dropped_minutes"] = merged.dropped_per_sensor[index_of(f)];
  }
  report["records"] = merged.dataset.size();
  report["segments"] = merged.dataset.segment_starts().size();
  write_file(run, "dataset.csv", [&](std::ostream& o) { write_csv(merged.dataset, o); });
  write_file(run, "ingest_report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  write_manifest(run);
  out << "merged " << merged.dataset.size() << " records\n";
  return kOk;
}

int cmd_label(const CommonFlags& flags, const std::string& input, std::ostream& out) {
  Run run = resolve("label", flags);
  const Dataset data = read_dataset(run, input);
  const RuleSet rules = load_rules(run, flags.rules_path);
  const LabelResult result = label(data, rules);
  write_file(run, "labeled.csv", [&](std::ostream& o) { write_csv(result.dataset, o); });
  write_file(run, "label_report.json", [&](std::ostream& o) { o << label_report_json(result.report); });
  write_manifest(run);
  out << "labeled " << result.report.total << " records, " << result.report.anomalous << " anomalous\n";
  return kOk;
}

int cmd_inject(const CommonFlags& flags, const std::string& input, std::ostream& out) {
  Run run = resolve("inject", flags);
  const Dataset data = read_dataset(run, input);
  const RuleSet rules = load_rules(run, flags.rules_path);
  const InjectionSpec spec = injection_spec(run);
  const InjectionResult result = inject(data, spec, rules);
  write_file(run, "injected.csv", [&](std::ostream& o) { write_csv(result.dataset, o); });
  write_file(run, "injection_log.csv", [&](std::ostream& o) { write_injection_log(result.log, o); });
  write_manifest(run);
  out << "injected " << spec.count << " events (" << result.log.size() << " records)\n";
  return kOk;
}

int cmd_train(const CommonFlags& flags, const std::string& input, std::ostream& out) {
  Run run = resolve("train", flags);
  Dataset data = read_dataset(run, input);
  if (!data.fully_labeled()) throw DataError("train: dataset is not labeled; run `label` first");
  const std::size_t anomalous = data.anomalous_count();
  run.effective["scrub"] = flags.scrub ? "true" : "false";
  if (anomalous > 0) {
    if (!flags.scrub) {
      throw DataError("train: dataset contains " + std::to_string(anomalous) +
                      " anomalous records; pass --scrub to drop them");
    }
    data = scrub(data);
  }
  const PipelineOptions options = pipeline_options(run);
  const TrainOutcome outcome = train_pipeline(data, options);
  write_file(run, "model.json", [&](std::ostream& o) { save_model(outcome.state, o); });
  write_file(run, "train_report.json", [&](std::ostream& o) { o << train_report_json(outcome); });
  write_manifest(run);
  out << "trained on " << outcome.train_rows << " rows (" << outcome.validation_rows << " validation) in "
      << outcome.report.wall_time_seconds << " s; threshold " << outcome.state.threshold->value << '\n';
  return kOk;
}

int cmd_detect(const CommonFlags& flags, const std::string& model_path, const std::string& input, std::ostream& out) {
  Run run = resolve("detect", flags);
  ModelState state = [&] {
    auto in = open_input(run, model_path);
    return load_model(in);
  }();
  Dataset data = read_dataset(run, input);
  if (!data.fully_labeled()) {
    data = label(data, load_rules(run, flags.rules_path)).dataset;
    run.effective["labels"] = "computed";
  } else {
    run.effective["labels"] = "from input";
  }
  const EvaluationReport report = timed_detect(state, data);
  write_detection(run, report);
  write_reconstruction(run, report, data);
  write_manifest(run);
  summarize(out, report);
  return kOk;
}

// Re-scores a loss plot file (timestamp,loss,label,threshold) without the model.
int cmd_evaluate(const CommonFlags& flags, const std::string& input, const std::string& threshold_text,
                 std::ostream& out) {
  Run run = resolve("evaluate", flags);
  auto in = open_input(run, input);
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "timestamp,loss,label,threshold") {
    throw ParseError("header", "expected timestamp,loss,label,threshold");
  }
  EvaluationReport report;
  std::optional<double> file_threshold;
  for (std::size_t row = 2; std::getline(in, line); ++row) {
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 4) throw IngestError(row, "expected 4 columns");
    const auto loss = text::to_double(cells[1]);
    const auto th = text::to_double(cells[3]);
    if (!loss || !th) throw IngestError(row, "non-numeric loss or threshold");
    const auto tag = text::trim(cells[2]);
    if (tag != "normal" && tag != "anomalous") throw IngestError(row, "label must be normal or anomalous");
    if (file_threshold && *file_threshold != *th) throw IngestError(row, "threshold column is not constant");
    file_threshold = *th;
    report.timestamps.push_back(parse_timestamp(std::string(text::trim(cells[0]))));
    report.losses.push_back(*loss);
    report.labels.push_back(tag == "anomalous" ? Verdict::anomalous : Verdict::normal);
  }
  if (report.losses.empty()) throw DataError("evaluate: no rows in '" + input + "'");
  report.threshold.value = *file_threshold;
  if (!threshold_text.empty()) {
    const auto v = text::to_double(threshold_text);
    if (!v) throw UsageError("--threshold: '" + threshold_text + "' is not a number");
    report.threshold.value = *v;
  }
  report.threshold.k = 0;
  report.threshold.source_count = 0;
  run.effective["threshold"] = text::shortest(report.threshold.value);
  report.predictions = classify(report.losses, report.threshold);
  report.confusion = confusion(report.predictions, report.labels);
  report.metrics = metrics(report.confusion);
  write_file(run, "evaluation_report.json", [&](std::ostream& o) { o << report_json(report, false); });
  write_manifest(run);
  summarize(out, report);
  return kOk;
}

int cmd_export_plots(const CommonFlags& flags, const std::string& model_path, const std::string& input,
                     std::ostream& out) {
  Run run = resolve("export-plots", flags);
  ModelState state = [&] {
    auto in = open_input(run, model_path);
    return load_model(in);
  }();
  Dataset data = read_dataset(run, input);
  if (!data.fully_labeled()) data = label(data, load_rules(run, flags.rules_path)).dataset;
  const EvaluationReport report = timed_detect(state, data);
  write_file(run, "plot_losses.csv", [&](std::ostream& o) {
    write_loss_plot(o, report.timestamps, report.losses, report.labels, report.threshold);
  });
  write_reconstruction(run, report, data);
  write_manifest(run);
  out << "wrote plots for " << data.size() << " records\n";
  return kOk;
}

int cmd_reproduce(const CommonFlags& flags, std::ostream& out) {
  Run run = resolve("reproduce", flags);
  const PipelineOptions options = pipeline_options(run);
  const ReferenceScenario scenario = reference_scenario(run.seed);
  run.effective["scenario.test_begin"] = format_iso(scenario.test_begin);
  run.effective["scenario.test_end"] = format_iso(scenario.test_end);
  run.effective["scenario.days"] = std::to_string(scenario.config.days);
  run.effective["rules"] = "default";

  write_file(run, "rules.txt", [&](std::ostream& o) { write_ruleset(default_ruleset(), o); });
  write_file(run, "train.csv", [&](std::ostream& o) { write_csv(scenario.train, o); });
  write_file(run, "test.csv", [&](std::ostream& o) { write_csv(scenario.test, o); });
  write_file(run, "injection_log.csv", [&](std::ostream& o) { write_injection_log(scenario.injections, o); });

  const TrainOutcome outcome = train_pipeline(scenario.train, options);
  write_file(run, "model.json", [&](std::ostream& o) { save_model(outcome.state, o); });
  write_file(run, "train_report.json", [&](std::ostream& o) { o << train_report_json(outcome); });

  const EvaluationReport report = timed_detect(outcome.state, scenario.test);
  write_detection(run, report);
  write_reconstruction(run, report, scenario.test);
  write_manifest(run);
  out << "train " << scenario.train.size() << " records, test " << scenario.test.size() << " records ("
      << scenario.test.anomalous_count() << " anomalous)\n"
      << "training " << outcome.report.wall_time_seconds << " s\n";
  summarize(out, report);
  return kOk;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_profile, bool with_rules) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--seed", flags.seed, "64-bit seed (overrides config and $GREENSENTRY_SEED)");
  cmd->add_option("--out", flags.out_dir, "output directory")->capture_default_str();
  if (with_profile) {
    cmd->add_option("--profile", flags.profile, "training profile")->check(CLI::IsMember({"paper", "tuned"}));
  }
  if (with_rules) cmd->add_option("--rules", flags.rules_path, "rule file (id,feature,kind,threshold,category)");
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greenhouse sensor anomaly detection with a dense autoencoder", "greensentry"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string input, model_path;
  IngestFlags ingest_flags;

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic minute-resolution dataset");
  add_common(simulate_cmd, flags, false, false);

  auto* ingest_cmd = app.add_subcommand("ingest", "forward-fill and merge per-sensor timestamp,value CSVs");
  add_common(ingest_cmd, flags, false, false);
  for (Feature f : kFeatureOrder) {
    std::string name(feature_name(f));
    std::string flag = "--" + name;
    for (auto& c : flag) c = c == '_' ? '-' : c;
    ingest_cmd->add_option(flag, ingest_flags.paths[f], name + " CSV")->required();
  }
  ingest_cmd->add_option("--max-fill", ingest_flags.max_fill, "forward-fill cap in minutes")->capture_default_str();

  auto* label_cmd = app.add_subcommand("label", "apply the threshold rules to a dataset");
  add_common(label_cmd, flags, false, true);
  label_cmd->add_option("--input", input, "dataset CSV")->required();

  auto* inject_cmd = app.add_subcommand("inject", "inject synthetic anomalies (inject.* config keys)");
  add_common(inject_cmd, flags, false, true);
  inject_cmd->add_option("--input", input, "dataset CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "train and calibrate the autoencoder on normal data");
  add_common(train_cmd, flags, true, false);
  train_cmd->add_option("--input", input, "labeled dataset CSV")->required();
  train_cmd->add_flag("--scrub", flags.scrub, "drop anomalous records before training");

  auto* detect_cmd = app.add_subcommand("detect", "score a dataset and evaluate against its labels");
  add_common(detect_cmd, flags, false, true);
  detect_cmd->add_option("--model", model_path, "model.json from train")->required();
  detect_cmd->add_option("--input", input, "dataset CSV (labeled, or labeled on the fly with --rules)")->required();

  std::string threshold_text;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "recompute metrics from a plot_losses.csv file");
  add_common(evaluate_cmd, flags, false, false);
  evaluate_cmd->add_option("--input", input, "plot_losses.csv from detect")->required();
  evaluate_cmd->add_option("--threshold", threshold_text, "override the threshold column");

  auto* plots_cmd = app.add_subcommand("export-plots", "write loss and reconstruction plot data");
  add_common(plots_cmd, flags, false, true);
  plots_cmd->add_option("--model", model_path, "calibrated model.json")->required();
  plots_cmd->add_option("--input", input, "dataset CSV")->required();

  auto* reproduce_cmd = app.add_subcommand("reproduce", "run the full reference scenario end to end");
  add_common(reproduce_cmd, flags, true, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(flags, out);
    if (*ingest_cmd) return cmd_ingest(flags, ingest_flags, out);
    if (*label_cmd) return cmd_label(flags, input, out);
    if (*inject_cmd) return cmd_inject(flags, input, out);
    if (*train_cmd) return cmd_train(flags, input, out);
    if (*detect_cmd) return cmd_detect(flags, model_path, input, out);
    if (*evaluate_cmd) return cmd_evaluate(flags, input, threshold_text, out);
    if (*plots_cmd) return cmd_export_plots(flags, model_path, input, out);
    if (*reproduce_cmd) return cmd_reproduce(flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace greensentry::cli
