// Reference kernels: textbook loop order, one accumulator per output element.

#include "tsc/net/kernels.hpp"

#include <cmath>

namespace tsc::net::kernels::serial {

void dense_forward(DenseShape s, std::span<const double> in, std::span<const double> weights,
                   std::span<const double> bias, std::span<double> out) {
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t o = 0; o < s.out_dim; ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < s.in_dim; ++i) acc += in[r * s.in_dim + i] * weights[o * s.in_dim + i];
      out[r * s.out_dim + o] = acc;
    }
  }
}

void dense_backward_input(DenseShape s, std::span<const double> grad_out,
                          std::span<const double> weights, std::span<double> grad_in) {
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t i = 0; i < s.in_dim; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < s.out_dim; ++o)
        acc += grad_out[r * s.out_dim + o] * weights[o * s.in_dim + i];
      grad_in[r * s.in_dim + i] = acc;
    }
  }
}

void dense_backward_params(DenseShape s, std::span<const double> grad_out,
                           std::span<const double> in, std::span<double> grad_w,
                           std::span<double> grad_b) {
  for (std::size_t o = 0; o < s.out_dim; ++o) {
    for (std::size_t i = 0; i < s.in_dim; ++i) {
      double acc = 0.0;
      for (std::size_t r = 0; r < s.rows; ++r) acc += grad_out[r * s.out_dim + o] * in[r * s.in_dim + i];
      grad_w[o * s.in_dim + i] = acc;
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < s.rows; ++r) acc += grad_out[r * s.out_dim + o];
    grad_b[o] = acc;
  }
}

void batch_norm_forward(std::size_t rows, std::size_t cols, double eps, std::span<const double> in,
                        ColumnStats stats, std::span<double> normalized) {
  const double n = static_cast<double>(rows);
  for (std::size_t c = 0; c < cols; ++c) {
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
  for (std::size_t c = 0; c < cols; ++c) {
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

}  // namespace tsc::net::kernels::serial
