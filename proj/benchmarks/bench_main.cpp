// Microbenchmarks for the hot paths: frame smoothing, segment aggregation,
// PCA whitening, k-means, the DEC soft-assignment/target pair, spectral
// clustering and scoring.
#include <benchmark/benchmark.h>

#include <vector>

#include "diarcluster/aggregate.hpp"
#include "diarcluster/dec.hpp"
#include "diarcluster/kmeans.hpp"
#include "diarcluster/rng.hpp"
#include "diarcluster/scoring.hpp"
#include "diarcluster/smoothing.hpp"
#include "diarcluster/spectral.hpp"
#include "diarcluster/synthgen.hpp"
#include "diarcluster/whitening.hpp"

namespace {

using namespace diarcluster;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.gaussian();
  return m;
}

SynthSession bench_session() {
  SynthConfig config;
  config.session_id = "bench";
  config.n_speakers = 6;
  config.dim = 64;
  config.n_segments = 200;
  config.seed = 17;
  return generate_session(config);
}

void BM_SmoothFrames(benchmark::State& state) {
  FrameMatrix frames;
  frames.session_id = "bench";
  frames.frames = random_matrix(20000, 64, 1);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(smooth_frames(frames, order));
  }
  state.SetItemsProcessed(state.iterations() * frames.n_frames());
}
BENCHMARK(BM_SmoothFrames)->Arg(0)->Arg(4)->Arg(10);

void BM_AggregateTable(benchmark::State& state) {
  const SynthSession session = bench_session();
  const Aggregation aggregation = state.range(0) == 0 ? Aggregation::median
                                                      : Aggregation::mean;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        aggregate_table(session.frames, session.segments, aggregation));
  }
  state.SetItemsProcessed(
      state.iterations() *
      static_cast<std::int64_t>(session.segments.segments.size()));
}
BENCHMARK(BM_AggregateTable)->Arg(0)->Arg(1);

void BM_PcaFitApply(benchmark::State& state) {
  const Eigen::MatrixXd data = random_matrix(400, 128, 2);
  for (auto _ : state) {
    PcaWhitener pca;
    pca.fit(data, 32);
    benchmark::DoNotOptimize(pca.apply(data));
  }
}
BENCHMARK(BM_PcaFitApply);

void BM_Kmeans(benchmark::State& state) {
  const Eigen::MatrixXd data = random_matrix(500, 32, 3);
  for (auto _ : state) {
    KmeansOptions options;
    options.k = static_cast<int>(state.range(0));
    options.seed = 4;
    benchmark::DoNotOptimize(kmeans(data, options));
  }
}
BENCHMARK(BM_Kmeans)->Arg(4)->Arg(8);

void BM_SoftAssignTarget(benchmark::State& state) {
  const Eigen::MatrixXd z = random_matrix(512, 16, 5);
  const Eigen::MatrixXd centroids = random_matrix(8, 16, 6);
  for (auto _ : state) {
    const Eigen::MatrixXd q = soft_assign(z, centroids);
    benchmark::DoNotOptimize(target_distribution(q));
  }
  state.SetItemsProcessed(state.iterations() * z.rows());
}
BENCHMARK(BM_SoftAssignTarget);

void BM_SpectralCluster(benchmark::State& state) {
  const Eigen::MatrixXd data = random_matrix(300, 32, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_cluster(data, 6, 8));
  }
}
BENCHMARK(BM_SpectralCluster);

void BM_Score(benchmark::State& state) {
  const SynthSession session = bench_session();
  std::vector<int> hyp;
  hyp.reserve(session.segments.segments.size());
  Rng rng(9);
  for (std::size_t i = 0; i < session.segments.segments.size(); ++i) {
    hyp.push_back(rng.uniform_int(6));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(score(session.segments, hyp));
  }
}
BENCHMARK(BM_Score);

}  // namespace

BENCHMARK_MAIN();
