#include "tsc/net/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace tsc::net {
namespace {

double objective(const Mlp& net, const Matrix& input, const Matrix& upstream, Mode mode) {
  Mlp scratch = net;  // train-mode forward folds batch stats into the copy only
  const ForwardCache cache = forward(scratch, input, mode);
  double total = 0.0;
  for (std::size_t k = 0; k < upstream.data.size(); ++k) total += upstream.data[k] * cache.output().data[k];
  return total;
}

// Leaky ReLU has a kink at zero; finite differences straddling it are meaningless.
bool near_kink(const Mlp& net, const Matrix& input, Mode mode, double margin) {
  Mlp scratch = net;
  const ForwardCache cache = forward(scratch, input, mode);
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    if (net.layers()[k].activation != Activation::leaky_relu) continue;
    for (double z : cache.layers[k].pre_activation.data)
      if (std::abs(z) < margin) return true;
  }
  return false;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / denom;
}

double check_gradients(const Mlp& net, const Matrix& input, const Matrix& upstream, Mode mode,
                       double step, std::size_t* values_checked) {
  Mlp scratch = net;
  const ForwardCache cache = forward(scratch, input, mode);
  const GradBundle grads = backward(net, cache, upstream);

  double worst = 0.0;
  std::size_t count = 0;
  Mlp probe = net;
  auto params = probe.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + step;
    const double up = objective(probe, input, upstream, mode);
    params[k] = saved - step;
    const double down = objective(probe, input, upstream, mode);
    params[k] = saved;
    worst = std::max(worst, relative_error(grads.parameters[k], (up - down) / (2.0 * step)));
    ++count;
  }
  Matrix x = input;
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    const double saved = x.data[k];
    x.data[k] = saved + step;
    const double up = objective(net, x, upstream, mode);
    x.data[k] = saved - step;
    const double down = objective(net, x, upstream, mode);
    x.data[k] = saved;
    worst = std::max(worst, relative_error(grads.input.data[k], (up - down) / (2.0 * step)));
    ++count;
  }
  if (values_checked != nullptr) *values_checked += count;
  return worst;
}

GradCheckReport run_gradient_suite(const GradCheckOptions& options) {
  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> dim(1, options.max_dim);
  std::uniform_int_distribution<std::size_t> depth(1, options.max_layers);
  std::uniform_int_distribution<std::size_t> batch(2, 5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> positive(0.2, 2.0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int a = 0; a < options.architectures; ++a) {
    const int final_act = a % 3;
    const bool want_bn = (a / 3) % 2 == 1;
    const Mode mode = (a / 6) % 2 == 0 ? Mode::train : Mode::infer;

    const std::size_t n_layers = depth(rng);
    std::vector<LayerSpec> specs;
    std::size_t width = dim(rng);
    for (std::size_t k = 0; k < n_layers; ++k) {
      LayerSpec s;
      s.in_dim = width;
      const bool last = k + 1 == n_layers;
      s.out_dim = dim(rng);
      if (last && final_act == 2) s.out_dim = std::max<std::size_t>(s.out_dim, 2);
      s.activation = last ? static_cast<Activation>(final_act)
                          : (coin(rng) ? Activation::leaky_relu : Activation::linear);
      s.batch_norm_before = want_bn && (k == 0 || coin(rng));
      specs.push_back(s);
      width = s.out_dim;
    }

    Mlp net(specs, rng());
    for (double& p : net.parameters()) p = unit(rng);
    for (auto& bn : net.batch_norm()) {
      if (!bn) continue;
      for (double& m : bn->running_mean) m = 0.5 * unit(rng);
      for (double& v : bn->running_var) v = positive(rng);
    }

    const std::size_t rows = batch(rng);
    Matrix input(rows, specs.front().in_dim);
    Matrix upstream(rows, specs.back().out_dim);
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (double& v : input.data) v = normal(rng);
      if (!near_kink(net, input, mode, 1e-3)) break;
    }
    for (double& v : upstream.data) v = normal(rng);

    const double err = check_gradients(net, input, upstream, mode, options.step, &report.values_checked);
    if (err > report.max_relative_error || report.worst.empty()) {
      report.max_relative_error = std::max(report.max_relative_error, err);
      std::ostringstream os;
      os << "architecture " << a << " (" << n_layers << " layers, final "
         << to_string(static_cast<Activation>(final_act)) << (want_bn ? ", batch norm" : "")
         << (mode == Mode::train ? ", train" : ", infer") << ")";
      report.worst = os.str();
    }
    ++report.combos_seen[final_act][want_bn ? 1 : 0][mode == Mode::train ? 1 : 0];
    ++report.architectures;
  }
  return report;
}

}  // namespace tsc::net
