#include "greensentry/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "greensentry/error.hpp"
#include "greensentry/rng.hpp"

namespace greensentry {
namespace {

FeatureVector scale_row(const ScalerParams& p, const FeatureVector& x) {
  FeatureVector y{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    y[f] = p.degenerate[f] ? 0.0 : (x[f] - p.min[f]) / (p.max[f] - p.min[f]);
  }
  return y;
}

FeatureVector unscale_row(const ScalerParams& p, const FeatureVector& y) {
  FeatureVector x{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    x[f] = p.degenerate[f] ? p.min[f] : p.min[f] + y[f] * (p.max[f] - p.min[f]);
  }
  return x;
}

template <typename RowFn>
FeatureMatrix map_rows(const FeatureMatrix& m, Execution exec, RowFn fn) {
  FeatureMatrix out;
  out.keys = m.keys;
  out.anomalous = m.anomalous;
  out.rows.resize(m.rows.size());
  const auto n = static_cast<std::ptrdiff_t>(m.rows.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out.rows[i] = fn(m.rows[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out.rows[i] = fn(m.rows[i]);
  }
  return out;
}

FeatureMatrix take(const FeatureMatrix& m, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.rows.reserve(idx.size());
  out.keys.reserve(idx.size());
  for (auto i : idx) {
    out.rows.push_back(m.rows[i]);
    if (!m.keys.empty()) out.keys.push_back(m.keys[i]);
    if (!m.anomalous.empty()) out.anomalous.push_back(m.anomalous[i]);
  }
  return out;
}

}  // namespace

FeatureMatrix to_matrix(const Dataset& dataset) {
  FeatureMatrix m;
  m.rows.reserve(dataset.size());
  m.keys.reserve(dataset.size());
  const bool labeled = std::any_of(dataset.records().begin(), dataset.records().end(),
                                   [](const SensorRecord& r) { return r.label.has_value(); });
  for (const auto& r : dataset.records()) {
    m.rows.push_back(r.values);
    m.keys.push_back(r.time);
    if (labeled) m.anomalous.push_back(r.label && r.label->anomalous ? 1 : 0);
  }
  return m;
}

ScalerParams fit_minmax(const FeatureMatrix& train) {
  if (train.empty()) throw DataError("fit_minmax: empty training matrix");
  ScalerParams p;
  p.min = train.rows.front();
  p.max = train.rows.front();
  for (const auto& row : train.rows) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      p.min[f] = std::min(p.min[f], row[f]);
      p.max[f] = std::max(p.max[f], row[f]);
    }
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) p.degenerate[f] = p.min[f] == p.max[f];
  return p;
}

FeatureMatrix transform(const ScalerParams& params, const FeatureMatrix& m, Execution exec) {
  return map_rows(m, exec, [&](const FeatureVector& x) { return scale_row(params, x); });
}

FeatureMatrix inverse_transform(const ScalerParams& params, const FeatureMatrix& m, Execution exec) {
  return map_rows(m, exec, [&](const FeatureVector& y) { return unscale_row(params, y); });
}

Split split(const FeatureMatrix& normal, double ratio, SplitMode mode, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split: ratio must lie in (0, 1)");
  const std::size_t n = normal.size();
  if (n < 2) throw DataError("split: need at least 2 rows");
  auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == SplitMode::shuffled) {
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  }
  const std::vector<std::size_t> head(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> tail(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {take(normal, head), take(normal, tail)};
}

}  // namespace greensentry
