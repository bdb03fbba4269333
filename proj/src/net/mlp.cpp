#include "tsc/net/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tsc/errors.hpp"
#include "tsc/net/kernels.hpp"

namespace tsc::net {
namespace kern = kernels::parallel;

namespace {

// Keeps running_var strictly positive when a feature is constant in every batch.
constexpr double kMinRunningVar = std::numeric_limits<double>::min();

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

void apply_activation(Activation act, const Matrix& z, Matrix& y) {
  y = z;
  switch (act) {
    case Activation::leaky_relu:
      for (double& v : y.data) v = v >= 0.0 ? v : kLeakySlope * v;
      break;
    case Activation::linear:
      break;
    case Activation::softmax:
      softmax_rows(y);
      break;
  }
}

/// Gradient with respect to the pre-activation given the gradient of the output.
Matrix activation_backward(Activation act, const LayerTrace& t, const Matrix& grad_out) {
  Matrix g = grad_out;
  switch (act) {
    case Activation::leaky_relu:
      for (std::size_t k = 0; k < g.data.size(); ++k)
        if (t.pre_activation.data[k] < 0.0) g.data[k] *= kLeakySlope;
      break;
    case Activation::linear:
      break;
    case Activation::softmax:
      for (std::size_t r = 0; r < g.rows; ++r) {
        auto s = t.output.row(r);
        auto gr = g.row(r);
        double dot = 0.0;
        for (std::size_t c = 0; c < g.cols; ++c) dot += gr[c] * s[c];
        for (std::size_t c = 0; c < g.cols; ++c) gr[c] = s[c] * (gr[c] - dot);
      }
      break;
  }
  return g;
}

void normalize_infer(const BatchNormStats& bn, const Matrix& in, Matrix& out, std::vector<double>& inv_std) {
  out = Matrix(in.rows, in.cols);
  inv_std.resize(in.cols);
  for (std::size_t c = 0; c < in.cols; ++c) inv_std[c] = 1.0 / std::sqrt(bn.running_var[c] + bn.epsilon);
  for (std::size_t r = 0; r < in.rows; ++r)
    for (std::size_t c = 0; c < in.cols; ++c)
      out(r, c) = (in(r, c) - bn.running_mean[c]) * inv_std[c];
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::linear: return "linear";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

void validate_layer_specs(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (specs[k].in_dim == 0 || specs[k].out_dim == 0)
      throw ShapeError("layer " + std::to_string(k) + " has a zero dimension");
    if (k > 0 && specs[k].in_dim != specs[k - 1].out_dim)
      throw ShapeError("layer " + std::to_string(k) + " input width mismatch: " +
                       dims(specs[k].in_dim, specs[k - 1].out_dim));
    if (specs[k].activation == Activation::softmax && k + 1 != specs.size())
      throw ShapeError("softmax is only allowed on the final layer");
  }
}

Mlp::Mlp(std::vector<LayerSpec> specs, std::uint64_t seed) : specs_(std::move(specs)) {
  validate_layer_specs(specs_);
  layout();
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const double bound = k + 1 == specs_.size()
                             ? kFinalLayerInitBound
                             : 1.0 / std::sqrt(static_cast<double>(specs_[k].in_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : weights(k)) w = dist(rng);
  }
}

Mlp Mlp::from_state(std::vector<LayerSpec> specs, std::vector<double> parameters,
                    std::vector<std::optional<BatchNormStats>> batch_norm) {
  Mlp net;
  net.specs_ = std::move(specs);
  validate_layer_specs(net.specs_);
  net.layout();
  if (parameters.size() != net.params_.size())
    throw ShapeError("parameter count mismatch: " + dims(parameters.size(), net.params_.size()));
  if (batch_norm.size() != net.specs_.size()) throw ShapeError("batch-norm site list mismatch");
  for (std::size_t k = 0; k < net.specs_.size(); ++k) {
    if (batch_norm[k].has_value() != net.specs_[k].batch_norm_before)
      throw ShapeError("batch-norm presence mismatch at layer " + std::to_string(k));
    if (batch_norm[k] && (batch_norm[k]->running_mean.size() != net.specs_[k].in_dim ||
                          batch_norm[k]->running_var.size() != net.specs_[k].in_dim))
      throw ShapeError("batch-norm stats width mismatch at layer " + std::to_string(k));
  }
  net.params_ = std::move(parameters);
  net.bn_ = std::move(batch_norm);
  return net;
}

void Mlp::layout() {
  weight_offset_.clear();
  bias_offset_.clear();
  bn_.clear();
  std::size_t offset = 0;
  for (const auto& s : specs_) {
    weight_offset_.push_back(offset);
    offset += s.in_dim * s.out_dim;
    bias_offset_.push_back(offset);
    offset += s.out_dim;
    if (s.batch_norm_before) {
      BatchNormStats bn;
      bn.running_mean.assign(s.in_dim, 0.0);
      bn.running_var.assign(s.in_dim, 1.0);
      bn_.emplace_back(std::move(bn));
    } else {
      bn_.emplace_back(std::nullopt);
    }
  }
  params_.assign(offset, 0.0);
}

std::span<double> Mlp::weights(std::size_t k) {
  return {params_.data() + weight_offset_[k], specs_[k].in_dim * specs_[k].out_dim};
}
std::span<const double> Mlp::weights(std::size_t k) const {
  return {params_.data() + weight_offset_[k], specs_[k].in_dim * specs_[k].out_dim};
}
std::span<double> Mlp::bias(std::size_t k) {
  return {params_.data() + bias_offset_[k], specs_[k].out_dim};
}
std::span<const double> Mlp::bias(std::size_t k) const {
  return {params_.data() + bias_offset_[k], specs_[k].out_dim};
}

bool Mlp::has_batch_norm() const {
  return std::any_of(bn_.begin(), bn_.end(), [](const auto& b) { return b.has_value(); });
}

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
}

namespace {

void run_layers(const Mlp& net, const Matrix& input, Mode mode, ForwardCache& cache,
                std::vector<std::optional<BatchNormStats>>* stats_sink) {
  if (input.cols != net.input_width())
    throw ShapeError("input width mismatch: " + dims(input.cols, net.input_width()));
  if (input.rows == 0) throw ShapeError("empty input batch");
  if (mode == Mode::train && input.rows < 2 && net.has_batch_norm())
    throw ShapeError("train-mode batch norm needs a batch of at least 2 rows");

  cache.mode = mode;
  cache.structure = net.layers();
  cache.layers.resize(net.layers().size());
  const Matrix* current = &input;
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const LayerSpec& spec = net.layers()[k];
    LayerTrace& t = cache.layers[k];
    t.input = *current;
    const Matrix* dense_in = &t.input;
    if (spec.batch_norm_before) {
      const BatchNormStats& bn = *net.batch_norm()[k];
      if (mode == Mode::train) {
        std::vector<double> mean(spec.in_dim), var(spec.in_dim);
        t.inv_std.assign(spec.in_dim, 0.0);
        t.normalized = Matrix(t.input.rows, spec.in_dim);
        kern::batch_norm_forward(t.input.rows, spec.in_dim, bn.epsilon, t.input.data,
                                 {mean, var, t.inv_std}, t.normalized.data);
        if (stats_sink != nullptr) {
          BatchNormStats& s = *(*stats_sink)[k];
          const double n = static_cast<double>(t.input.rows);
          for (std::size_t c = 0; c < spec.in_dim; ++c) {
            const double unbiased = var[c] * n / (n - 1.0);
            s.running_mean[c] = s.momentum * s.running_mean[c] + (1.0 - s.momentum) * mean[c];
            s.running_var[c] =
                std::max(s.momentum * s.running_var[c] + (1.0 - s.momentum) * unbiased, kMinRunningVar);
          }
        }
      } else {
        normalize_infer(bn, t.input, t.normalized, t.inv_std);
      }
      dense_in = &t.normalized;
    }
    t.pre_activation = Matrix(dense_in->rows, spec.out_dim);
    kern::dense_forward({dense_in->rows, spec.in_dim, spec.out_dim}, dense_in->data, net.weights(k),
                        net.bias(k), t.pre_activation.data);
    apply_activation(spec.activation, t.pre_activation, t.output);
    current = &t.output;
  }
}

}  // namespace

ForwardCache forward(Mlp& net, const Matrix& input, Mode mode) {
  ForwardCache cache;
  run_layers(net, input, mode, cache, &net.batch_norm());
  return cache;
}

Matrix predict(const Mlp& net, const Matrix& input) {
  ForwardCache cache;
  run_layers(net, input, Mode::infer, cache, nullptr);
  return std::move(cache.layers.back().output);
}

Matrix predict_logits(const Mlp& net, const Matrix& input) {
  ForwardCache cache;
  run_layers(net, input, Mode::infer, cache, nullptr);
  return std::move(cache.layers.back().pre_activation);
}

void GradBundle::check_congruent(const Mlp& net) const {
  if (parameters.size() != net.parameter_count())
    throw ShapeError("gradient bundle does not match network: " +
                     dims(parameters.size(), net.parameter_count()));
}

GradBundle backward(const Mlp& net, const ForwardCache& cache, const Matrix& upstream) {
  if (cache.structure != net.layers() || cache.layers.size() != net.layers().size())
    throw ShapeError("forward cache was produced by a different network");
  const Matrix& out = cache.output();
  if (upstream.rows != out.rows || upstream.cols != out.cols)
    throw ShapeError("upstream gradient shape mismatch");

  GradBundle grads;
  grads.parameters.assign(net.parameter_count(), 0.0);
  Matrix grad = upstream;
  for (std::size_t kk = net.layers().size(); kk-- > 0;) {
    const LayerSpec& spec = net.layers()[kk];
    const LayerTrace& t = cache.layers[kk];
    const Matrix g_pre = activation_backward(spec.activation, t, grad);
    const Matrix& dense_in = spec.batch_norm_before ? t.normalized : t.input;
    const kernels::DenseShape shape{g_pre.rows, spec.in_dim, spec.out_dim};

    std::span<double> gw(grads.parameters.data() + net.weight_offset(kk), spec.in_dim * spec.out_dim);
    std::span<double> gb(grads.parameters.data() + net.bias_offset(kk), spec.out_dim);
    kern::dense_backward_params(shape, g_pre.data, dense_in.data, gw, gb);

    Matrix g_in(g_pre.rows, spec.in_dim);
    kern::dense_backward_input(shape, g_pre.data, net.weights(kk), g_in.data);
    if (spec.batch_norm_before) {
      Matrix g_x(g_in.rows, g_in.cols);
      if (cache.mode == Mode::train) {
        kern::batch_norm_backward(g_in.rows, g_in.cols, g_in.data, t.normalized.data, t.inv_std, g_x.data);
      } else {
        for (std::size_t r = 0; r < g_in.rows; ++r)
          for (std::size_t c = 0; c < g_in.cols; ++c) g_x(r, c) = g_in(r, c) * t.inv_std[c];
      }
      g_in = std::move(g_x);
    }
    grad = std::move(g_in);
  }
  grads.input = std::move(grad);
  return grads;
}

}  // namespace tsc::net
