// OpenMP kernels. Work is split over independent output elements only; each
// element keeps the serial reduction order, so results do not depend on the
// thread count. Inner loops are written as axpy sweeps over contiguous memory
// so they vectorize without reassociating any sum.

#include "tsc/net/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#ifdef TSC_HAVE_OPENMP
#include <omp.h>
#endif

namespace tsc::net::kernels {

bool openmp_enabled() {
#ifdef TSC_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

// AVX2 clone chosen at load time where the CPU has it. Contraction is off
// project-wide, so both clones round identically.
#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
#define TSC_MULTIVERSION __attribute__((target_clones("avx2", "default")))
#else
#define TSC_MULTIVERSION
#endif

namespace parallel {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::int64_t kMinParallelWork = 1 << 15;

std::int64_t work(DenseShape s) {
  return static_cast<std::int64_t>(s.rows * s.in_dim * s.out_dim);
}

}  // namespace

TSC_MULTIVERSION
void dense_forward(DenseShape s, std::span<const double> in, std::span<const double> weights,
                   std::span<const double> bias, std::span<double> out) {
  std::vector<double> wt(s.in_dim * s.out_dim);
  for (std::size_t o = 0; o < s.out_dim; ++o)
    for (std::size_t i = 0; i < s.in_dim; ++i) wt[i * s.out_dim + o] = weights[o * s.in_dim + i];

  const auto rows = static_cast<std::int64_t>(s.rows);
  const std::size_t n = s.out_dim;
#pragma omp parallel for schedule(static) if (work(s) >= kMinParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    double* y = out.data() + r * n;
    const double* x = in.data() + r * s.in_dim;
    for (std::size_t o = 0; o < n; ++o) y[o] = bias[o];
    // Four terms per pass keep y[o] in a register; the additions still
    // happen one at a time in ascending i.
    std::size_t i = 0;
    for (; i + 4 <= s.in_dim; i += 4) {
      const double x0 = x[i], x1 = x[i + 1], x2 = x[i + 2], x3 = x[i + 3];
      const double* w0 = wt.data() + i * n;
      const double* w1 = w0 + n;
      const double* w2 = w1 + n;
      const double* w3 = w2 + n;
      for (std::size_t o = 0; o < n; ++o) {
        double a = y[o];
        a += x0 * w0[o];
        a += x1 * w1[o];
        a += x2 * w2[o];
        a += x3 * w3[o];
        y[o] = a;
      }
    }
    for (; i < s.in_dim; ++i) {
      const double xi = x[i];
      const double* w = wt.data() + i * n;
      for (std::size_t o = 0; o < n; ++o) y[o] += xi * w[o];
    }
  }
}

TSC_MULTIVERSION
void dense_backward_input(DenseShape s, std::span<const double> grad_out,
                          std::span<const double> weights, std::span<double> grad_in) {
  const auto rows = static_cast<std::int64_t>(s.rows);
  const std::size_t n = s.in_dim;
#pragma omp parallel for schedule(static) if (work(s) >= kMinParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    double* gx = grad_in.data() + r * n;
    const double* gy = grad_out.data() + r * s.out_dim;
    for (std::size_t i = 0; i < n; ++i) gx[i] = 0.0;
    std::size_t o = 0;
    for (; o + 4 <= s.out_dim; o += 4) {
      const double g0 = gy[o], g1 = gy[o + 1], g2 = gy[o + 2], g3 = gy[o + 3];
      const double* w0 = weights.data() + o * n;
      const double* w1 = w0 + n;
      const double* w2 = w1 + n;
      const double* w3 = w2 + n;
      for (std::size_t i = 0; i < n; ++i) {
        double a = gx[i];
        a += g0 * w0[i];
        a += g1 * w1[i];
        a += g2 * w2[i];
        a += g3 * w3[i];
        gx[i] = a;
      }
    }
    for (; o < s.out_dim; ++o) {
      const double g = gy[o];
      const double* w = weights.data() + o * n;
      for (std::size_t i = 0; i < n; ++i) gx[i] += g * w[i];
    }
  }
}

TSC_MULTIVERSION
void dense_backward_params(DenseShape s, std::span<const double> grad_out,
                           std::span<const double> in, std::span<double> grad_w,
                           std::span<double> grad_b) {
  const auto outs = static_cast<std::int64_t>(s.out_dim);
  const std::size_t n = s.in_dim, m = s.out_dim;
#pragma omp parallel for schedule(static) if (work(s) >= kMinParallelWork)
  for (std::int64_t o = 0; o < outs; ++o) {
    double* gw = grad_w.data() + o * n;
    for (std::size_t i = 0; i < n; ++i) gw[i] = 0.0;
    double gb = 0.0;
    std::size_t r = 0;
    for (; r + 4 <= s.rows; r += 4) {
      const double g0 = grad_out[r * m + o], g1 = grad_out[(r + 1) * m + o], g2 = grad_out[(r + 2) * m + o],
                   g3 = grad_out[(r + 3) * m + o];
      const double* x0 = in.data() + r * n;
      const double* x1 = x0 + n;
      const double* x2 = x1 + n;
      const double* x3 = x2 + n;
      for (std::size_t i = 0; i < n; ++i) {
        double a = gw[i];
        a += g0 * x0[i];
        a += g1 * x1[i];
        a += g2 * x2[i];
        a += g3 * x3[i];
        gw[i] = a;
      }
      gb += g0;
      gb += g1;
      gb += g2;
      gb += g3;
    }
    for (; r < s.rows; ++r) {
      const double g = grad_out[r * m + o];
      const double* x = in.data() + r * n;
      for (std::size_t i = 0; i < n; ++i) gw[i] += g * x[i];
      gb += g;
    }
    grad_b[o] = gb;
  }
}

void batch_norm_forward(std::size_t rows, std::size_t cols, double eps, std::span<const double> in,
                        ColumnStats stats, std::span<double> normalized) {
  const double n = static_cast<double>(rows);
  const auto ncols = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static) if (static_cast<std::int64_t>(rows * cols) >= kMinParallelWork)
  for (std::int64_t c = 0; c < ncols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) sum += in[r * cols + c];
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = in[r * cols + c] - mean;
      sq += d * d;
    }
    const double var = sq / n;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    stats.mean[c] = mean;
    stats.variance[c] = var;
    stats.inv_std[c] = inv_std;
    for (std::size_t r = 0; r < rows; ++r) normalized[r * cols + c] = (in[r * cols + c] - mean) * inv_std;
  }
}

void batch_norm_backward(std::size_t rows, std::size_t cols, std::span<const double> grad_out,
                         std::span<const double> normalized, std::span<const double> inv_std,
                         std::span<double> grad_in) {
  const double n = static_cast<double>(rows);
  const auto ncols = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static) if (static_cast<std::int64_t>(rows * cols) >= kMinParallelWork)
  for (std::int64_t c = 0; c < ncols; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      sum_g += grad_out[r * cols + c];
      sum_gx += grad_out[r * cols + c] * normalized[r * cols + c];
    }
    const double scale = inv_std[c] / n;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t k = r * cols + c;
      grad_in[k] = scale * (n * grad_out[k] - sum_g - normalized[k] * sum_gx);
    }
  }
}

}  // namespace parallel
}  // namespace tsc::net::kernels
