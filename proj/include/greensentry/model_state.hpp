#pragma once

#include <iosfwd>
#include <optional>

#include "greensentry/autoencoder.hpp"
#include "greensentry/detect.hpp"
#include "greensentry/preprocess.hpp"

namespace greensentry {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to score new data, persisted as one JSON document.
struct ModelState {
  Parameters params;
  ScalerParams scaler;
  std::optional<Threshold> threshold;
  TrainConfig train_config;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

void save_model(const ModelState& state, std::ostream& out);
/// Throws DataError on a missing/unsupported format_version or shape
/// mismatches.
ModelState load_model(std::istream& in);

}  // namespace greensentry
