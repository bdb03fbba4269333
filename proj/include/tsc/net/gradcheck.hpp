#pragma once

#include <cstdint>
#include <string>

#include "tsc/net/mlp.hpp"

namespace tsc::net {

struct GradCheckOptions {
  int architectures = 60;
  std::uint64_t seed = 2024;
  double step = 1e-5;
  std::size_t max_dim = 8;
  std::size_t max_layers = 3;
};

struct GradCheckReport {
  int architectures = 0;
  std::size_t values_checked = 0;
  double max_relative_error = 0.0;
  std::string worst;  // description of the worst entry
  // combination coverage: [final activation][has batch norm][mode]
  int combos_seen[3][2][2] = {};
};

/// Relative error with a floor of 1e-3 on the denominator, so entries whose
/// true gradient is ~0 are judged by absolute error instead.
double relative_error(double analytic, double numeric);

/// Central-difference check of backward() on the scalar sum(upstream .* output),
/// both parameter and input gradients. Uses forward passes only as the oracle.
double check_gradients(const Mlp& net, const Matrix& input, const Matrix& upstream, Mode mode,
                       double step, std::size_t* values_checked = nullptr);

/// Random architectures cycling through every final activation, with and
/// without batch norm, in both modes.
GradCheckReport run_gradient_suite(const GradCheckOptions& options);

}  // namespace tsc::net
