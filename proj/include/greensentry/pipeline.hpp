#pragma once

#include <cstdint>

#include "greensentry/autoencoder.hpp"
#include "greensentry/model_state.hpp"
#include "greensentry/preprocess.hpp"

namespace greensentry {

/// `paper`: 60 epochs, batch 8, lr 1e-6, plain SGD.
/// `tuned`: same schedule with Adam at lr 1e-3.
enum class Profile { paper, tuned };
Profile parse_profile(std::string_view name);
std::string_view profile_name(Profile p);

struct PipelineOptions {
  ModelConfig model = ModelConfig::funnel(256);
  TrainConfig train;
  double split_ratio = 0.75;
  SplitMode split_mode = SplitMode::chronological;
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
  int threshold_k = 5;

  /// Profile defaults with all seeds derived from `seed`.
  static PipelineOptions for_profile(Profile profile, std::uint64_t seed);
};

struct TrainOutcome {
  ModelState state;  // calibrated
  TrainReport report;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
};

/// split -> fit scaler on the train part -> scale -> init -> train ->
/// calibrate the threshold on validation losses. `normal` must contain no
/// anomalous labels.
TrainOutcome train_pipeline(const Dataset& normal, const PipelineOptions& options);

}  // namespace greensentry
