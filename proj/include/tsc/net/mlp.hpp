#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tsc/net/matrix.hpp"

namespace tsc::net {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kFinalLayerInitBound = 3e-3;

enum class Activation : std::uint8_t { leaky_relu = 0, linear = 1, softmax = 2 };

std::string_view to_string(Activation a);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::linear;
  bool batch_norm_before = false;  // normalize this layer's input

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Running statistics of a batch-norm site. The site has no learnable affine
/// part; the following dense layer provides it.
struct BatchNormStats {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = kBatchNormMomentum;
  double epsilon = kBatchNormEpsilon;

  friend bool operator==(const BatchNormStats&, const BatchNormStats&) = default;
};

enum class Mode { train, infer };

/// Feed-forward network. All learnable parameters live in one flat buffer,
/// per layer: weights (out_dim x in_dim, row-major) followed by biases.
class Mlp {
 public:
  Mlp() = default;

  /// Uniform fan-in initialization, final layer in +-3e-3, zero biases.
  Mlp(std::vector<LayerSpec> specs, std::uint64_t seed);

  /// Rebuilds a network from explicit state (deserialization).
  static Mlp from_state(std::vector<LayerSpec> specs, std::vector<double> parameters,
                        std::vector<std::optional<BatchNormStats>> batch_norm);

  const std::vector<LayerSpec>& layers() const { return specs_; }
  std::size_t input_width() const { return specs_.front().in_dim; }
  std::size_t output_width() const { return specs_.back().out_dim; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;
  std::size_t weight_offset(std::size_t layer) const { return weight_offset_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return bias_offset_[layer]; }

  std::vector<std::optional<BatchNormStats>>& batch_norm() { return bn_; }
  const std::vector<std::optional<BatchNormStats>>& batch_norm() const { return bn_; }
  bool has_batch_norm() const;

  bool same_structure(const Mlp& other) const { return specs_ == other.specs_; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  void layout();

  std::vector<LayerSpec> specs_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  std::vector<double> params_;
  std::vector<std::optional<BatchNormStats>> bn_;
};

/// Throws ShapeError unless the list is non-empty, dimension-chained and
/// softmax appears only as the last activation.
void validate_layer_specs(std::span<const LayerSpec> specs);

/// Per-layer record of a forward pass.
struct LayerTrace {
  Matrix input;         // layer input as received
  Matrix normalized;    // batch-norm output (empty when no batch-norm site)
  std::vector<double> inv_std;
  Matrix pre_activation;
  Matrix output;
};

class ForwardCache {
 public:
  const Matrix& output() const { return layers.back().output; }
  /// Final layer before its activation (softmax logits for a policy head).
  const Matrix& logits() const { return layers.back().pre_activation; }

  Mode mode = Mode::infer;
  std::vector<LayerSpec> structure;
  std::vector<LayerTrace> layers;
};

/// Forward pass. Train mode normalizes with batch statistics and folds them
/// into the running statistics; infer mode only reads the running statistics.
ForwardCache forward(Mlp& net, const Matrix& input, Mode mode);

/// Infer-mode forward without keeping a cache.
Matrix predict(const Mlp& net, const Matrix& input);
/// Infer-mode forward returning the final pre-activation.
Matrix predict_logits(const Mlp& net, const Matrix& input);

struct GradBundle {
  std::vector<double> parameters;  // congruent with Mlp::parameters()
  Matrix input;                    // d objective / d network input

  void check_congruent(const Mlp& net) const;
};

/// Reverse-mode gradients of sum(upstream .* output) for all parameters and
/// the input.
GradBundle backward(const Mlp& net, const ForwardCache& cache, const Matrix& upstream);

void softmax_rows(Matrix& m);

}  // namespace tsc::net
