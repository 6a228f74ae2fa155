#include <benchmark/benchmark.h>

#include "schrodclass/classify.hpp"
#include "schrodclass/fixtures.hpp"
#include "schrodclass/numverify.hpp"

using namespace schrodclass;

namespace {

const char* kPotentials[] = {"x^3 + t*x", "exp(x)", "x^(-2)", "i*x", "x^2/4 + i*x", "0"};

void BM_ClassifyFull(benchmark::State& state) {
    Expr V = parse(kPotentials[state.range(0)]);
    for (auto _ : state) benchmark::DoNotOptimize(classify_full(V));
    state.SetLabel(kPotentials[state.range(0)]);
}
BENCHMARK(BM_ClassifyFull)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_NumericDimension(benchmark::State& state) {
    Expr V = parse(kPotentials[state.range(0)]);
    for (auto _ : state) benchmark::DoNotOptimize(numeric_dimension(V));
    state.SetLabel(kPotentials[state.range(0)]);
}
BENCHMARK(BM_NumericDimension)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_CrankNicolson(benchmark::State& state) {
    Grid g;
    g.n_x = static_cast<int>(state.range(0));
    g.n_t = 4 * g.n_x;
    Expr V = parse("x^2/10 + i*x/5");
    Expr init = parse("exp(0 - x^2)");
    for (auto _ : state) benchmark::DoNotOptimize(crank_nicolson(V, init, g));
    state.SetComplexityN(static_cast<int64_t>(g.n_x) * g.n_t);
}
BENCHMARK(BM_CrankNicolson)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();

void BM_FixtureSelfTest(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(fixture_self_test(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_FixtureSelfTest)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
