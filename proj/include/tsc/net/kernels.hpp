#pragma once

// Data-parallel inner loops of the network engine.
//
// Two implementations share one contract: `serial` is the plain reference kept
// for testing, `parallel` is the OpenMP version used by the engine. Every
// output element is reduced in the same order by both, so their results are
// bit-identical for any thread count.

#include <cstddef>
#include <span>

namespace tsc::net::kernels {

struct DenseShape {
  std::size_t rows;     // batch
  std::size_t in_dim;
  std::size_t out_dim;
};

/// BatchNorm column statistics written by batch_norm_forward.
struct ColumnStats {
  std::span<double> mean;      // per column
  std::span<double> variance;  // biased, per column
  std::span<double> inv_std;   // 1 / sqrt(variance + eps)
};

#define TSC_KERNEL_DECLS                                                                         \
  /* out = in * W^T + b, W is out_dim x in_dim row-major. */                                     \
  void dense_forward(DenseShape s, std::span<const double> in, std::span<const double> weights, \
                     std::span<const double> bias, std::span<double> out);                       \
  /* grad_in = grad_out * W */                                                                   \
  void dense_backward_input(DenseShape s, std::span<const double> grad_out,                      \
                            std::span<const double> weights, std::span<double> grad_in);         \
  /* grad_w = grad_out^T * in, grad_b = column sums of grad_out */                               \
  void dense_backward_params(DenseShape s, std::span<const double> grad_out,                     \
                             std::span<const double> in, std::span<double> grad_w,               \
                             std::span<double> grad_b);                                          \
  void batch_norm_forward(std::size_t rows, std::size_t cols, double eps,                        \
                          std::span<const double> in, ColumnStats stats,                         \
                          std::span<double> normalized);                                         \
  /* Backward through batch-statistics normalization (no affine parameters). */                  \
  void batch_norm_backward(std::size_t rows, std::size_t cols, std::span<const double> grad_out, \
                           std::span<const double> normalized, std::span<const double> inv_std,  \
                           std::span<double> grad_in);

namespace serial {
TSC_KERNEL_DECLS
}  // namespace serial

namespace parallel {
TSC_KERNEL_DECLS
}  // namespace parallel

#undef TSC_KERNEL_DECLS

/// True when the parallel kernels were compiled with OpenMP.
bool openmp_enabled();

}  // namespace tsc::net::kernels
