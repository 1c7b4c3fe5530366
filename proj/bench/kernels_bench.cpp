#include <random>

#include <benchmark/benchmark.h>

#include "tsad/kernels.hpp"

namespace {

using namespace tsad;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

struct SweepInput {
  std::vector<double> scores;
  Mask labels;
  std::vector<AnomalySegment> segments;
  std::vector<double> thresholds;
};

SweepInput sweep_input(std::size_t n, std::size_t grid) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> norm(0.0, 1.0);
  SweepInput in;
  in.scores.resize(n);
  in.labels.assign(n, 0);
  for (auto& s : in.scores) s = norm(rng);
  for (std::size_t start = 100; start + 40 < n; start += 1000) {
    for (std::size_t t = start; t < start + 40; ++t) {
      in.labels[t] = 1;
      in.scores[t] += 2.0;
    }
  }
  in.segments = segments_from_labels(in.labels);
  for (std::size_t i = 0; i < grid; ++i) in.thresholds.push_back(-4.0 + 8.0 * static_cast<double>(i) / grid);
  return in;
}

void BM_CovarianceSerial(benchmark::State& state) {
  const Matrix x = random_matrix(state.range(0), 38, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::covariance_serial(x));
}
void BM_CovarianceOmp(benchmark::State& state) {
  const Matrix x = random_matrix(state.range(0), 38, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::covariance_omp(x));
}

void BM_ProjectionSerial(benchmark::State& state) {
  const Matrix x = random_matrix(state.range(0), 38, 2);
  const Matrix basis = Eigen::HouseholderQR<Matrix>(random_matrix(38, 38, 3)).householderQ() *
                       Matrix::Identity(38, 30);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::projection_energy_serial(x, basis));
}
void BM_ProjectionOmp(benchmark::State& state) {
  const Matrix x = random_matrix(state.range(0), 38, 2);
  const Matrix basis = Eigen::HouseholderQR<Matrix>(random_matrix(38, 38, 3)).householderQ() *
                       Matrix::Identity(38, 30);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::projection_energy_omp(x, basis));
}

void BM_AbsRowMeanSerial(benchmark::State& state) {
  const Matrix x = random_matrix(state.range(0), 38, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::abs_row_mean_serial(x));
}
void BM_AbsRowMeanOmp(benchmark::State& state) {
  const Matrix x = random_matrix(state.range(0), 38, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::abs_row_mean_omp(x));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto in = sweep_input(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::sweep_serial(in.scores, in.labels, in.segments, in.thresholds, Protocol::PointAdjusted));
  }
}
void BM_SweepOmp(benchmark::State& state) {
  const auto in = sweep_input(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::sweep_omp(in.scores, in.labels, in.segments, in.thresholds, Protocol::PointAdjusted));
  }
}
void BM_SweepSorted(benchmark::State& state) {
  const auto in = sweep_input(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::sweep_sorted(in.scores, in.labels, in.segments, in.thresholds, Protocol::PointAdjusted));
  }
}

}  // namespace

BENCHMARK(BM_CovarianceSerial)->Arg(25000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceOmp)->Arg(25000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ProjectionSerial)->Arg(25000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectionOmp)->Arg(25000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AbsRowMeanSerial)->Arg(25000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AbsRowMeanOmp)->Arg(25000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Arg(25000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepOmp)->Arg(25000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSorted)->Arg(25000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
