// Serial reference vs OpenMP kernels on the (space x age) lattice, plus whole time steps.

#include "hybridpop/kernels.hpp"
#include "hybridpop/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace hybridpop;

namespace
{

constexpr std::size_t n_ages = 1024;

AgeField filled(std::size_t n_x)
{
    AgeField w(n_x, n_ages);
    for (std::size_t i = 0; i < n_x; ++i) {
        for (std::size_t j = 0; j < n_ages; ++j) {
            w(i, j) = std::exp(-0.01 * static_cast<double>(j)) * (1.0 + 0.1 * static_cast<double>(i % 7));
        }
    }
    return w;
}

template <kernels::Policy P>
void BM_advance_ages(benchmark::State& state)
{
    const auto n_x = static_cast<std::size_t>(state.range(0));
    AgeField w     = filled(n_x);
    AgeField f(n_x, n_ages, 0.999);
    std::vector<double> renewal(n_x, 1.0), exiting(n_x);
    for (auto _ : state) {
        kernels::advance_ages(P, w, f, renewal, exiting);
        benchmark::DoNotOptimize(w.flat().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n_x * n_ages));
}

template <kernels::Policy P>
void BM_survival_factors(benchmark::State& state)
{
    const auto n_x = static_cast<std::size_t>(state.range(0));
    AgeField f(n_x, n_ages);
    std::vector<double> rows(n_x, 1.0), ages(n_ages, 0.01);
    for (auto _ : state) {
        kernels::survival_factors(P, rows, ages, f);
        benchmark::DoNotOptimize(f.flat().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n_x * n_ages));
}

template <kernels::Policy P>
void BM_weighted_age_sums(benchmark::State& state)
{
    const auto n_x = static_cast<std::size_t>(state.range(0));
    AgeField w     = filled(n_x);
    std::vector<double> weights(n_ages, 0.01), out(n_x);
    for (auto _ : state) {
        kernels::weighted_age_sums(P, w, weights, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n_x * n_ages));
}

template <kernels::Policy P>
void BM_full_step(benchmark::State& state)
{
    const auto n_x = static_cast<std::size_t>(state.range(0));
    ModelSpec spec;
    spec.beta.spatial = spatial::Constant{6.0};
    spec.beta.density = density::Saturating{1.0};
    spec.mu.density   = density::LinearThreshold{0.1, 5.0};
    auto params       = instantiate(spec, n_x);
    auto grid         = build_grid(params, n_x, 0.01);
    AgeField w(n_x, grid.n_ages());
    for (std::size_t i = 0; i < n_x; ++i) {
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            w(i, j) = std::exp(-grid.age(j));
        }
    }
    auto st = make_state(params, grid, SpatialField(n_x, 1.0), w);
    Stepper stepper(params, grid, {P});
    for (auto _ : state) {
        stepper.advance(st);
        benchmark::DoNotOptimize(st.P);
    }
}

} // namespace

BENCHMARK(BM_advance_ages<kernels::Policy::serial>)->Arg(65)->Arg(257)->Arg(1025);
BENCHMARK(BM_advance_ages<kernels::Policy::parallel>)->Arg(65)->Arg(257)->Arg(1025);
BENCHMARK(BM_survival_factors<kernels::Policy::serial>)->Arg(65)->Arg(257)->Arg(1025);
BENCHMARK(BM_survival_factors<kernels::Policy::parallel>)->Arg(65)->Arg(257)->Arg(1025);
BENCHMARK(BM_weighted_age_sums<kernels::Policy::serial>)->Arg(65)->Arg(257)->Arg(1025);
BENCHMARK(BM_weighted_age_sums<kernels::Policy::parallel>)->Arg(65)->Arg(257)->Arg(1025);
BENCHMARK(BM_full_step<kernels::Policy::serial>)->Arg(65)->Arg(257);
BENCHMARK(BM_full_step<kernels::Policy::parallel>)->Arg(65)->Arg(257);

BENCHMARK_MAIN();
