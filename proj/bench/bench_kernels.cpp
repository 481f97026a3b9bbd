// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "ccc/kernels.hpp"

namespace {

using namespace ccc;
namespace k = ccc::kernels;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = n(rng);
  return m;
}

template <bool Parallel>
void BM_DenseForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix in = random_matrix(rows, 14, 1);
  const Matrix w = random_matrix(10, 14, 2);
  const std::vector<double> b(10, 0.1);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) k::dense_forward(in, w, b, k::Activation::tanh, out);
    else k::serial::dense_forward(in, w, b, k::Activation::tanh, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void BM_DenseBackward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix in = random_matrix(rows, 14, 3);
  const Matrix w = random_matrix(10, 14, 4);
  const std::vector<double> b(10, 0.0);
  Matrix out;
  k::serial::dense_forward(in, w, b, k::Activation::tanh, out);
  const Matrix grad_out = random_matrix(rows, 10, 5);
  Matrix grad_in, grad_w;
  std::vector<double> grad_b;
  for (auto _ : state) {
    if constexpr (Parallel) k::dense_backward(in, out, grad_out, w, k::Activation::tanh, &grad_in, grad_w, grad_b);
    else k::serial::dense_backward(in, out, grad_out, w, k::Activation::tanh, &grad_in, grad_w, grad_b);
    benchmark::DoNotOptimize(grad_w.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void BM_ZScore(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix base = random_matrix(rows, 14, 6);
  for (auto _ : state) {
    state.PauseTiming();
    Matrix m = base;
    state.ResumeTiming();
    if constexpr (Parallel) k::zscore_columns(m);
    else k::serial::zscore_columns(m);
    benchmark::DoNotOptimize(m.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void BM_HalfSqCosts(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix z = random_matrix(rows, 1, 7);
  const std::vector<double> centers{-1.0, -0.5, -0.2, 0.0, 0.3, 0.6, 0.9, 1.2};
  for (auto _ : state) {
    Matrix c = Parallel ? k::half_sq_costs(z.data(), centers) : k::serial::half_sq_costs(z.data(), centers);
    benchmark::DoNotOptimize(c.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

#define CCC_BENCH_PAIR(fn)                                                         \
  BENCHMARK(fn<false>)->Name(#fn "/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 19); \
  BENCHMARK(fn<true>)->Name(#fn "/openmp")->RangeMultiplier(8)->Range(1 << 10, 1 << 19)

CCC_BENCH_PAIR(BM_DenseForward);
CCC_BENCH_PAIR(BM_DenseBackward);
CCC_BENCH_PAIR(BM_ZScore);
CCC_BENCH_PAIR(BM_HalfSqCosts);

}  // namespace

BENCHMARK_MAIN();
