#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "eddm/deform.hpp"
#include "eddm/mesh.hpp"
#include "eddm/numerics.hpp"
#include "eddm/rig.hpp"
#include "eddm/scenario.hpp"
#include "eddm/smoothing.hpp"

namespace {

using namespace eddm;

std::vector<Mat3> random_matrices(size_t count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return double(rng() >> 11) * 0x1p-53 * 4.0 - 2.0; };
  std::vector<Mat3> out(count);
  for (Mat3& m : out)
    for (double& e : m.v) e = uniform();
  return out;
}

void BM_EigSym3(benchmark::State& state) {
  const auto ms = random_matrices(1024, 7);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eig_sym3(SymMat3::gram(ms[i++ & 1023])));
  }
}
BENCHMARK(BM_EigSym3);

void BM_PolarRotation(benchmark::State& state) {
  const auto ms = random_matrices(1024, 7);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(polar_rotation(ms[i++ & 1023]));
  }
}
BENCHMARK(BM_PolarRotation);

void BM_SvdRotation(benchmark::State& state) {
  const auto ms = random_matrices(1024, 7);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(svd_rotation(ms[i++ & 1023]));
  }
}
BENCHMARK(BM_SvdRotation);

void BM_CotangentWeights(benchmark::State& state) {
  const Scenario s = make_fig1_scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cotangent_weights(s.mesh));
  }
}
BENCHMARK(BM_CotangentWeights);

void BM_SmoothPositions(benchmark::State& state) {
  const Scenario s = make_fig1_scenario();
  const SmoothingWeights w = cotangent_weights(s.mesh);
  const SmoothingConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(smooth_positions(w, config, s.mesh.positions));
  }
}
BENCHMARK(BM_SmoothPositions);

void BM_PrecomputeOmega(benchmark::State& state) {
  const Scenario s = make_fig1_scenario();
  const SmoothingWeights w = cotangent_weights(s.mesh);
  for (auto _ : state) {
    benchmark::DoNotOptimize(precompute_omega(s.mesh, s.weights, w, SmoothingConfig{}));
  }
}
BENCHMARK(BM_PrecomputeOmega);

void BM_DeformEddm(benchmark::State& state) {
  const Scenario s = make_fig1_scenario();
  const SmoothingWeights w = cotangent_weights(s.mesh);
  const OmegaTable omega = precompute_omega(s.mesh, s.weights, w, SmoothingConfig{});
  const auto skinning = skinning_matrices(s.rig, s.pose);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deform_eddm(s.mesh, omega, skinning));
  }
}
BENCHMARK(BM_DeformEddm);

void BM_DeformLbs(benchmark::State& state) {
  const Scenario s = make_fig1_scenario();
  const auto skinning = skinning_matrices(s.rig, s.pose);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deform_lbs(s.mesh, s.weights, skinning));
  }
}
BENCHMARK(BM_DeformLbs);

}  // namespace

BENCHMARK_MAIN();
