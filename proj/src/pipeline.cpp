#include "greensentry/pipeline.hpp"

#include "greensentry/error.hpp"
#include "greensentry/rng.hpp"

namespace greensentry {

Profile parse_profile(std::string_view name) {
  if (name == "paper") return Profile::paper;
  if (name == "tuned") return Profile::tuned;
  throw UsageError("unknown profile '" + std::string(name) + "' (expected paper or tuned)");
}

std::string_view profile_name(Profile p) { return p == Profile::paper ? "paper" : "tuned"; }

PipelineOptions PipelineOptions::for_profile(Profile profile, std::uint64_t seed) {
  PipelineOptions o;
  o.train.epochs = 60;
  o.train.batch_size = 8;
  if (profile == Profile::paper) {
    o.train.learning_rate = 1e-6;
    o.train.optimizer = Optimizer::sgd;
  } else {
    o.train.learning_rate = 1e-3;
    o.train.optimizer = Optimizer::adam;
  }
  o.init_seed = Rng::derive(seed, 10).next();
  o.train.seed = Rng::derive(seed, 11).next();
  o.split_seed = Rng::derive(seed, 12).next();
  return o;
}

TrainOutcome train_pipeline(const Dataset& normal, const PipelineOptions& options) {
  if (normal.anomalous_count() != 0) {
    throw DataError("training data contains " + std::to_string(normal.anomalous_count()) +
                    " anomalous records; scrub them first");
  }
  const Split parts = split(to_matrix(normal), options.split_ratio, options.split_mode, options.split_seed);
  TrainOutcome out;
  out.train_rows = parts.train.size();
  out.validation_rows = parts.validation.size();
  out.state.scaler = fit_minmax(parts.train);
  const FeatureMatrix train_scaled = transform(out.state.scaler, parts.train);
  const FeatureMatrix val_scaled = transform(out.state.scaler, parts.validation);

  auto trained = train(init(options.model, options.init_seed), train_scaled, val_scaled, options.train);
  out.state.params = std::move(trained.params);
  out.state.train_config = options.train;
  out.report = std::move(trained.report);
  out.state.threshold =
      calibrate_threshold(reconstruction_losses(out.state.params, val_scaled), options.threshold_k);
  return out;
}

}  // namespace greensentry
