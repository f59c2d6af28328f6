#include <random>

#include <benchmark/benchmark.h>

#include "sosdec/chebyshev.hpp"
#include "sosdec/decompose.hpp"
#include "sosdec/measures.hpp"
#include "sosdec/poly.hpp"
#include "sosdec/sosprog.hpp"

using namespace sosdec;

namespace {

PointMeasure random_measure(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(0.5, 2.0);
  PointMeasure mu;
  for (int i = 0; i < m; ++i) {
    mu.nodes.push_back(random_unit_vector(n, rng));
    mu.weights.push_back(w(rng));
  }
  return mu;
}

MultiPoly dense_poly(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MultiPoly p(n, d);
  for (int k = 0; k <= d; ++k)
    for (const auto& a : monomials_of_degree(n, k)) p.set(a, u(rng));
  return p;
}

}  // namespace

static void PolyMul(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p = dense_poly(3, d, 1), q = dense_poly(3, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(poly_mul(p, q));
}
BENCHMARK(PolyMul)->DenseRange(2, 8, 2);

static void MomentsOfMeasure(benchmark::State& state) {
  const auto mu = random_measure(4, 6, 3);
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(moment_sequence(mu, d));
}
BENCHMARK(MomentsOfMeasure)->DenseRange(4, 12, 4);

static void Jennrich(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<Vec> comps;
  for (int i = 0; i < n; ++i) comps.push_back((1.0 + 0.1 * i) * Vec::Unit(n, i));
  MultiPoly t(n, 3);
  for (const auto& a : comps) t += pow_linear_form(a, 3).poly();
  const HomPoly t3(t, 3);
  for (auto _ : state) benchmark::DoNotOptimize(jennrich(t3));
}
BENCHMARK(Jennrich)->DenseRange(2, 6, 2);

static void TestimonyMembership(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto w = testimony_poly(Vec::Unit(3, 0), Interval(0.4, 3.5), d);
  for (auto _ : state) benchmark::DoNotOptimize(solve_program(sos_membership_program(w)));
}
BENCHMARK(TestimonyMembership)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

static void DecomposeMoments(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int d = 2 * m;
  const auto ms = moment_sequence(random_measure(3, m, 7), d);
  DecompOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(v_decompose_moments(ms, opts));
}
BENCHMARK(DecomposeMoments)->DenseRange(2, 4, 1)->Unit(benchmark::kMillisecond);

static void DecomposeSphereRound(benchmark::State& state) {
  const auto mu = random_measure(4, 6, 1000);
  const auto ms = moment_sequence(mu, 10);
  DecompOptions opts;
  opts.max_rounds = 1;
  for (auto _ : state) benchmark::DoNotOptimize(v_decompose_sphere(ms, mu.min_weight(), 0.5, opts));
}
BENCHMARK(DecomposeSphereRound)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
