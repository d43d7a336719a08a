#include "etcdos/dos.hpp"
#include "etcdos/simulation.hpp"
#include "etcdos/theory.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace etcdos;

namespace {

Scenario attacked_benchmark(double horizon) {
    Scenario sc;
    sc.system = benchmark_linear(0.5);
    sc.x0 = Vector::Constant(1, 1.0);
    sc.horizon = horizon;
    sc.integrator.retry_period = 1e-3;
    sc.attack = {GreedyPolicy{0.02, 1.0}, DosBudget{0.04, 400.0}};
    return sc;
}

DosSchedule random_schedule(std::size_t n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> gap(0.01, 1.0), len(0.01, 0.5);
    std::vector<DosInterval> iv;
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        iv.push_back({t, len(rng)});
        t = iv.back().end() + gap(rng);
    }
    return DosSchedule(iv);
}

void BM_Simulate(benchmark::State& state) {
    const auto sc = attacked_benchmark(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(simulate(sc));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SimulateSimplified(benchmark::State& state) {
    auto sc = attacked_benchmark(10.0);
    sc.trigger = {TriggerMode::Simplified, 0.5, std::sqrt(0.5) / 8.0};
    for (auto _ : state) benchmark::DoNotOptimize(simulate(sc));
}
BENCHMARK(BM_SimulateSimplified)->Unit(benchmark::kMillisecond);

void BM_DenseOracle(benchmark::State& state) {
    const auto sc = attacked_benchmark(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_simulate(sc, 1e-5));
}
BENCHMARK(BM_DenseOracle)->Unit(benchmark::kMillisecond);

void BM_VerifyBudget(benchmark::State& state) {
    const auto s = random_schedule(static_cast<std::size_t>(state.range(0)));
    const double horizon = s.intervals().back().end();
    for (auto _ : state) benchmark::DoNotOptimize(verify_budget(s, DosBudget{1.0, 2.0}, horizon));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VerifyBudget)->RangeMultiplier(10)->Range(10, 100000)->Complexity();

void BM_XiMeasure(benchmark::State& state) {
    const auto s = random_schedule(10000);
    const double horizon = s.intervals().back().end();
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(xi_measure(s, t));
        t = t + 0.37 > horizon ? 0.0 : t + 0.37;
    }
}
BENCHMARK(BM_XiMeasure);

void BM_InverseClosedForm(benchmark::State& state) {
    const auto f = ComparisonFunction::power(4.0, 2.0);
    double y = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.inverse(y));
        y = y * 1.0001 + 1e-3;
    }
}
BENCHMARK(BM_InverseClosedForm);

void BM_InverseBisection(benchmark::State& state) {
    const auto f = ComparisonFunction::polynomial({{1.0, 1.0}, {0.5, 2.5}, {0.1, 3.0}});
    double y = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.inverse(y));
        y = y * 1.0001 + 1e-3;
    }
}
BENCHMARK(BM_InverseBisection);

void BM_EstimateL(benchmark::State& state) {
    const auto sys = benchmark_linear();
    const int density = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_L(sys.plant, sys.feedback, 1.0, 2.0, density));
}
BENCHMARK(BM_EstimateL)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_EstimateSigma(benchmark::State& state) {
    const auto cert = benchmark_linear().certificate;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_sigma(cert, 2.0));
}
BENCHMARK(BM_EstimateSigma);

}  // namespace

BENCHMARK_MAIN();
