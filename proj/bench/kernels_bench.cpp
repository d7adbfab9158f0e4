// OpenMP kernels against their serial references. Each benchmark pair runs
// the same inputs; the parallel variant first asserts bit-identical output.

#include <cstdlib>
#include <iostream>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "macover/array_model.hpp"
#include "macover/kernels.hpp"

namespace {

using namespace macover;

struct Inputs {
  Eigen::VectorXcd w;
  std::vector<double> phases, x, angles;
  double wavelength = 0.3;
  Eigen::MatrixXd grads;
  std::vector<Eigen::MatrixXd> curvs;
  Eigen::VectorXd outer_w, curv_w;
};

Inputs make_inputs(int n, int l) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Inputs in;
  in.w.resize(n);
  for (int i = 0; i < n; ++i) {
    in.phases.push_back(2.0 * kPi * u(rng));
    in.w(i) = std::polar(1.0 / std::sqrt(n), in.phases.back());
    in.x.push_back(i * 0.5 * in.wavelength + 0.1 * u(rng));
  }
  for (int i = 0; i < l; ++i) in.angles.push_back(kPi * i / (l - 1));
  in.grads = Eigen::MatrixXd::Random(n + 1, l + 2 * n);
  in.outer_w = Eigen::VectorXd::Random(l + 2 * n).cwiseAbs();
  in.curv_w = Eigen::VectorXd::Random(l).cwiseAbs();
  for (int i = 0; i < l; ++i) in.curvs.push_back(-Eigen::MatrixXd::Identity(n, n));
  return in;
}

void require(bool same, const char* what) {
  if (!same) {
    std::cerr << what << ": OpenMP result differs from the serial reference\n";
    std::abort();
  }
}

template <bool Parallel>
void BM_BeamGains(benchmark::State& st) {
  const Inputs in = make_inputs(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  std::vector<double> g(in.angles.size()), ref(in.angles.size());
  if (Parallel) {
    kernels::beam_gains(in.w, in.x, in.angles, in.wavelength, g);
    kernels::serial::beam_gains(in.w, in.x, in.angles, in.wavelength, ref);
    require(g == ref, "beam_gains");
  }
  for (auto _ : st) {
    if (Parallel) kernels::beam_gains(in.w, in.x, in.angles, in.wavelength, g);
    else kernels::serial::beam_gains(in.w, in.x, in.angles, in.wavelength, g);
    benchmark::DoNotOptimize(g.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(in.angles.size()));
}

template <bool Parallel>
void BM_SurrogateTerms(benchmark::State& st) {
  const Inputs in = make_inputs(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  Eigen::MatrixXd b, rb;
  Eigen::VectorXd c, a, rc, ra;
  if (Parallel) {
    kernels::surrogate_terms(in.phases, in.x, in.angles, in.wavelength, b, c, a);
    kernels::serial::surrogate_terms(in.phases, in.x, in.angles, in.wavelength, rb, rc, ra);
    require(b == rb && c == rc && a == ra, "surrogate_terms");
  }
  for (auto _ : st) {
    if (Parallel) kernels::surrogate_terms(in.phases, in.x, in.angles, in.wavelength, b, c, a);
    else kernels::serial::surrogate_terms(in.phases, in.x, in.angles, in.wavelength, b, c, a);
    benchmark::DoNotOptimize(b.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(in.angles.size()));
}

template <bool Parallel>
void BM_BarrierHessian(benchmark::State& st) {
  const Inputs in = make_inputs(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  Eigen::MatrixXd h, ref;
  if (Parallel) {
    kernels::barrier_hessian(in.grads, in.curvs, in.outer_w, in.curv_w, h);
    kernels::serial::barrier_hessian(in.grads, in.curvs, in.outer_w, in.curv_w, ref);
    require(h == ref, "barrier_hessian");
  }
  for (auto _ : st) {
    if (Parallel) kernels::barrier_hessian(in.grads, in.curvs, in.outer_w, in.curv_w, h);
    else kernels::serial::barrier_hessian(in.grads, in.curvs, in.outer_w, in.curv_w, h);
    benchmark::DoNotOptimize(h.data());
  }
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {8, 16})
    for (int l : {181, 1801}) b->Args({n, l});
}

BENCHMARK(BM_BeamGains<false>)->Name("beam_gains/serial")->Apply(sizes);
BENCHMARK(BM_BeamGains<true>)->Name("beam_gains/openmp")->Apply(sizes);
BENCHMARK(BM_SurrogateTerms<false>)->Name("surrogate_terms/serial")->Apply(sizes);
BENCHMARK(BM_SurrogateTerms<true>)->Name("surrogate_terms/openmp")->Apply(sizes);
BENCHMARK(BM_BarrierHessian<false>)->Name("barrier_hessian/serial")->Apply(sizes);
BENCHMARK(BM_BarrierHessian<true>)->Name("barrier_hessian/openmp")->Apply(sizes);

}  // namespace

int main(int argc, char** argv) {
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
