// Serial reference against the OpenMP path of each kernel. Arg 0 is serial,
// arg 1 parallel; the second arg is the problem size.

#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "eulerspec/kernels.hpp"
#include "eulerspec/operators.hpp"

using namespace eulerspec;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

std::vector<Vec2> points(std::size_t n) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> d(0.0, kTwoPi);
  std::vector<Vec2> p(n);
  for (auto& x : p) x = {d(g), d(g)};
  return p;
}

void label(benchmark::State& s) {
  s.SetLabel(s.range(0) ? "parallel/" + std::to_string(omp_get_max_threads()) : "serial");
}

void BM_nudft(benchmark::State& s) {
  auto p = points(std::size_t(s.range(1)));
  std::vector<Complex> w(p.size(), Complex(1.0, 0.5));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::nudft(p, w, 48, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * s.range(1));
  label(s);
}

void BM_evaluate(benchmark::State& s) {
  fields::FourierScalarField f{fields::ModeBox(16)};
  for (std::size_t i = 0; i < f.box().size(); ++i) f.data()[i] = Complex(1.0 / (1.0 + double(i)), 0.0);
  auto p = points(std::size_t(s.range(1)));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::evaluate(f, p, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * s.range(1));
  label(s);
}

void BM_advect(benchmark::State& s) {
  auto u = fields::preset("cellular");
  auto p = points(std::size_t(s.range(1)));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::advect(u, p, 1.0, {.step = 1e-2}, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * s.range(1));
  label(s);
}

void BM_log_norm_at(benchmark::State& s) {
  auto u = fields::preset("cellular");
  auto p = points(std::size_t(s.range(1)));
  for (auto _ : s)
    benchmark::DoNotOptimize(kernels::log_norm_at(u, p, {1.0, 2.0}, 0.5, {.step = 1e-2}, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * s.range(1));
  label(s);
}

void BM_pushforward(benchmark::State& s) {
  auto u = fields::preset("cellular");
  auto w = operators::gaussian_bump({1.0, 1.0}, 0.5);
  operators::PushforwardOptions opt;
  opt.grid = int(s.range(1));
  opt.step = {.step = 2e-2};
  opt.exec = exec_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(operators::pushforward(w, u, 1.0, opt));
  label(s);
}

// Not an Exec kernel: the matrix-free L application for scale.
void BM_apply_L(benchmark::State& s) {
  auto u = fields::preset("cellular");
  fields::FourierScalarField w{fields::ModeBox(int(s.range(0)))};
  for (std::size_t i = 0; i < w.box().size(); ++i) w.data()[i] = Complex(1.0, -1.0);
  for (auto _ : s) benchmark::DoNotOptimize(operators::apply_L(u, w));
}

}  // namespace

BENCHMARK(BM_nudft)->ArgsProduct({{0, 1}, {1 << 12, 1 << 15}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_evaluate)->ArgsProduct({{0, 1}, {1 << 12}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_advect)->ArgsProduct({{0, 1}, {1 << 10}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_log_norm_at)->ArgsProduct({{0, 1}, {1 << 10}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pushforward)->ArgsProduct({{0, 1}, {64, 128}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_L)->Arg(16)->Arg(48)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
