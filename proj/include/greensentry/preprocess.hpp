#pragma once

#include <cstdint>
#include <vector>

#include "greensentry/execution.hpp"
#include "greensentry/sensor_data.hpp"

namespace greensentry {

/// Rows of five features in kFeatureOrder with their timestamps. The
/// optional flags carry dataset labels so training can refuse anomalies.
struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<Timestamp> keys;
  std::vector<char> anomalous;  // empty, or one flag per row

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

FeatureMatrix to_matrix(const Dataset& dataset);

struct ScalerParams {
  FeatureVector min{};
  FeatureVector max{};
  std::array<bool, kFeatureCount> degenerate{};

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

/// Per-feature min/max over the training rows. Throws DataError when empty.
ScalerParams fit_minmax(const FeatureMatrix& train);

/// (x - min) / (max - min); degenerate features map to 0. Not clipped.
FeatureMatrix transform(const ScalerParams& params, const FeatureMatrix& m,
                        Execution exec = Execution::parallel);
/// Inverse of transform; degenerate features restore the fitted constant.
FeatureMatrix inverse_transform(const ScalerParams& params, const FeatureMatrix& m,
                                Execution exec = Execution::parallel);

enum class SplitMode { chronological, shuffled };

struct Split {
  FeatureMatrix train;
  FeatureMatrix validation;
};

/// Train receives floor(ratio * n) rows, clamped so each side keeps at
/// least one. Chronological keeps order with validation as the suffix;
/// shuffled permutes with `seed` first.
Split split(const FeatureMatrix& normal, double ratio, SplitMode mode = SplitMode::chronological,
            std::uint64_t seed = 0);

}  // namespace greensentry
