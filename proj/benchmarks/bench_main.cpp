#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mzrom/burgers_mz.hpp"
#include "mzrom/fourier.hpp"
#include "mzrom/hermite.hpp"
#include "mzrom/kernel.hpp"
#include "mzrom/rom.hpp"
#include "mzrom/spectral.hpp"
#include "mzrom/surrogate.hpp"

using namespace mzrom;

namespace {

std::vector<double> random_grid(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> u(n);
  for (auto& v : u) v = z(rng);
  return u;
}

void BM_RealFftRoundTrip(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  RealFft fft(n);
  auto u = random_grid(n);
  std::vector<cplx> c(n / 2 + 1);
  for (auto _ : state) {
    fft.forward(u, c);
    fft.inverse(c, u);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_RealFftRoundTrip)->Arg(256)->Arg(512);

void BM_BurgersRhs(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  BurgersOperator op(n, 0.1);
  const auto s = sample_initial_condition(24, 3, n);
  SpectralState out(n);
  for (auto _ : state) {
    op.rhs(s, out);
    benchmark::DoNotOptimize(out.coeffs.data());
  }
}
BENCHMARK(BM_BurgersRhs)->Arg(256)->Arg(512);

void BM_VbObservables(benchmark::State& state) {
  const auto s = sample_initial_condition(24, 4, 256);
  for (auto _ : state) benchmark::DoNotOptimize(vb::observables(s, 3, 0.1));
}
BENCHMARK(BM_VbObservables);

void BM_SurrogateForward(benchmark::State& state) {
  const auto batch = Eigen::Index(state.range(0));
  const auto net = SurrogateNet::initialize(256, 512, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(256, batch);
  for (auto _ : state) {
    Eigen::MatrixXd y = net.forward(x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_SurrogateForward)->Arg(1)->Arg(64);

void BM_FilteredSurrogateRhs(benchmark::State& state) {
  const auto net = SurrogateNet::initialize(256, 512, 1);
  SurrogateOperator op(net, 0.1, std::size_t{12});
  const auto s = sample_initial_condition(24, 5, 256);
  SpectralState out(256);
  for (auto _ : state) {
    op.rhs(s, out);
    benchmark::DoNotOptimize(out.coeffs.data());
  }
}
BENCHMARK(BM_FilteredSurrogateRhs);

KernelTable random_kernels(std::size_t n_times, std::size_t n_resolved, unsigned degree) {
  KernelTable k;
  k.dt = 1e-3;
  k.n_times = n_times;
  k.n_resolved = n_resolved;
  k.max_degree = degree;
  k.scaling = ScalingParams::standard(n_resolved);
  k.multi_indices = build_basis(n_resolved, degree).multi_indices;
  k.K = random_grid(n_times * k.n_basis() * n_resolved);
  for (auto& v : k.K) v *= 1e-3;
  return k;
}

void BM_MemoryTerm(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const auto k = random_kernels(n + 1, 6, 3);
  HistoryBuffer h(k.n_basis());
  const auto vals = random_grid(k.n_basis());
  for (std::size_t m = 0; m <= n; ++m) h.push(vals);
  std::vector<double> out(6);
  for (auto _ : state) {
    memory_term(h, k, n, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MemoryTerm)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_Volterra(benchmark::State& state) {
  const auto nt = std::size_t(state.range(0));
  const auto basis = build_basis(6, 1);
  auto t = CorrelationTables::zeros(1e-3, nt, basis.size(), 6);
  const auto f = random_grid(t.f.size()), g = random_grid(t.g.size());
  t.f = f;
  t.g = g;
  for (auto& v : t.g) v *= 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(solve_volterra(t, basis, ScalingParams::standard(6)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Volterra)->Arg(500)->Arg(1000)->Arg(2000)->Complexity(benchmark::oNSquared);

void BM_BasisGradients(benchmark::State& state) {
  const auto basis = build_basis(6, 3);
  BasisEvaluator ev(basis, ScalingParams::standard(6));
  const auto x = random_grid(6);
  std::vector<double> v(basis.size()), g(basis.size() * 6);
  for (auto _ : state) {
    ev.values_and_gradients(x, v, g);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_BasisGradients);

}  // namespace
BENCHMARK_MAIN();
