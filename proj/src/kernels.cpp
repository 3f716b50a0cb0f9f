#include "greensentry/kernels.hpp"

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace greensentry::kernels {

#if defined(__SSE2__)
ScopedFlushToZero::ScopedFlushToZero() : saved_(_mm_getcsr()) {
  _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
  _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
}
ScopedFlushToZero::~ScopedFlushToZero() { _mm_setcsr(saved_); }
#else
ScopedFlushToZero::ScopedFlushToZero() = default;
ScopedFlushToZero::~ScopedFlushToZero() = default;
#endif

__attribute__((noinline)) double dot(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  for (std::size_t k = 0; i < n; ++i, ++k) acc[k] += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void dense_forward(std::span<const double> weights, std::span<const double> bias, std::size_t fan_in,
                   std::size_t fan_out, const double* in, double* out, std::size_t batch) {
  for (std::size_t j = 0; j < fan_out; ++j) {
    const double* row = weights.data() + j * fan_in;
    for (std::size_t s = 0; s < batch; ++s) {
      out[s * fan_out + j] = bias[j] + dot(row, in + s * fan_in, fan_in);
    }
  }
}

__attribute__((noinline)) double mean_squared_error(const double* x, const double* xhat, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = xhat[i] - x[i];
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

}  // namespace greensentry::kernels
