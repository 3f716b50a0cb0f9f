#pragma once

// Dense linear-algebra building blocks for the autoencoder.
//
// dot() accumulates in eight explicit lanes combined in a fixed tree, so
// its result depends only on the operands, never on batch size, thread
// count or call site. It is compiled once (not inlined) for that reason.

#include <cstddef>
#include <span>

namespace greensentry::kernels {

/// Flushes subnormal results and operands to zero on this thread while in
/// scope (x86 MXCSR FTZ/DAZ; no-op elsewhere). Decaying optimizer moments
/// otherwise drift into the subnormal range, where arithmetic is ~100x
/// slower.
class ScopedFlushToZero {
 public:
  ScopedFlushToZero();
  ~ScopedFlushToZero();
  ScopedFlushToZero(const ScopedFlushToZero&) = delete;
  ScopedFlushToZero& operator=(const ScopedFlushToZero&) = delete;

 private:
  unsigned saved_ = 0;
};

double dot(const double* a, const double* b, std::size_t n);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// out[s*fan_out + j] = bias[j] + dot(W[j, :], in[s*fan_in + :]) for every
/// sample s < batch. W is row-major fan_out x fan_in.
void dense_forward(std::span<const double> weights, std::span<const double> bias, std::size_t fan_in,
                   std::size_t fan_out, const double* in, double* out, std::size_t batch);

/// Mean of squared differences over n components, summed left to right.
double mean_squared_error(const double* x, const double* xhat, std::size_t n);

}  // namespace greensentry::kernels
