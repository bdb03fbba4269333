// Serial reference vs parallel kernels on the shapes training actually uses.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tsc/net/kernels.hpp"

namespace {

using namespace tsc::net::kernels;

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

DenseShape shape(const benchmark::State& st) {
  return {static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)),
          static_cast<std::size_t>(st.range(2))};
}

template <auto Kernel>
void forward(benchmark::State& st) {
  const DenseShape s = shape(st);
  const auto in = random_vector(s.rows * s.in_dim, 1), w = random_vector(s.out_dim * s.in_dim, 2),
             b = random_vector(s.out_dim, 3);
  std::vector<double> out(s.rows * s.out_dim);
  for (auto _ : st) {
    Kernel(s, in, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.rows * s.in_dim * s.out_dim));
}

template <auto Kernel>
void backward_input(benchmark::State& st) {
  const DenseShape s = shape(st);
  const auto g = random_vector(s.rows * s.out_dim, 1), w = random_vector(s.out_dim * s.in_dim, 2);
  std::vector<double> gi(s.rows * s.in_dim);
  for (auto _ : st) {
    Kernel(s, g, w, gi);
    benchmark::DoNotOptimize(gi.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.rows * s.in_dim * s.out_dim));
}

template <auto Kernel>
void backward_params(benchmark::State& st) {
  const DenseShape s = shape(st);
  const auto g = random_vector(s.rows * s.out_dim, 1), in = random_vector(s.rows * s.in_dim, 2);
  std::vector<double> gw(s.out_dim * s.in_dim), gb(s.out_dim);
  for (auto _ : st) {
    Kernel(s, g, in, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.rows * s.in_dim * s.out_dim));
}

template <auto Kernel>
void bn_forward(benchmark::State& st) {
  const std::size_t rows = static_cast<std::size_t>(st.range(0)), cols = static_cast<std::size_t>(st.range(1));
  const auto in = random_vector(rows * cols, 1);
  std::vector<double> mean(cols), var(cols), inv(cols), out(rows * cols);
  for (auto _ : st) {
    Kernel(rows, cols, 1e-5, in, {mean, var, inv}, out);
    benchmark::DoNotOptimize(out.data());
  }
}

// batch x in x out: critic first layer, hidden layer, actor output layer.
void dense_shapes(benchmark::internal::Benchmark* b) {
  for (long rows : {32, 512})
    for (auto [in, out] : {std::pair{80L, 64L}, {64L, 64L}, {64L, 4L}}) b->Args({rows, in, out});
}

}  // namespace

BENCHMARK(forward<serial::dense_forward>)->Apply(dense_shapes);
BENCHMARK(forward<parallel::dense_forward>)->Apply(dense_shapes);
BENCHMARK(backward_input<serial::dense_backward_input>)->Apply(dense_shapes);
BENCHMARK(backward_input<parallel::dense_backward_input>)->Apply(dense_shapes);
BENCHMARK(backward_params<serial::dense_backward_params>)->Apply(dense_shapes);
BENCHMARK(backward_params<parallel::dense_backward_params>)->Apply(dense_shapes);
BENCHMARK(bn_forward<serial::batch_norm_forward>)->Args({512, 4})->Args({512, 64});
BENCHMARK(bn_forward<parallel::batch_norm_forward>)->Args({512, 4})->Args({512, 64});

BENCHMARK_MAIN();
