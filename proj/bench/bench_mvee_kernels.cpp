// Serial reference vs OpenMP kernels, and whole solves under each policy.
// Args: {n, m}.

#include "smf/kernels.hpp"
#include "smf/mvee.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace smf;

namespace {

Mat lifted_cloud(int n, int m, std::uint64_t seed)
{
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat y(n + 1, m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) y(i, j) = u(rng);
        y(n, j) = 1.0;
    }
    return y;
}

template <kernels::Policy P>
void BM_KappaFromScratch(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0)), m = static_cast<int>(state.range(1));
    const Mat y = lifted_cloud(n, m, 1);
    const Mat minv = (y * y.transpose() / m).inverse();
    std::vector<double> kappa(m);
    for (auto _ : state) {
        kernels::kappa_from_scratch(P, y, minv, kappa);
        benchmark::DoNotOptimize(kappa.data());
    }
    state.SetItemsProcessed(state.iterations() * m);
}

template <kernels::Policy P>
void BM_KappaRankOne(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0)), m = static_cast<int>(state.range(1));
    const Mat y = lifted_cloud(n, m, 2);
    const Vec u = Vec::Constant(n + 1, 0.1);
    std::vector<double> kappa(m, 1.0);
    for (auto _ : state) {
        // scale 1, coef 0 keeps the values stable across repetitions
        kernels::kappa_rank_one(P, y, u, 1.0, 0.0, kappa);
        benchmark::DoNotOptimize(kappa.data());
    }
    state.SetItemsProcessed(state.iterations() * m);
}

template <kernels::Policy P>
void BM_Argmax(benchmark::State& state)
{
    const int m = static_cast<int>(state.range(1));
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(m);
    for (double& x : v) x = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::argmax(P, v));
    state.SetItemsProcessed(state.iterations() * m);
}

template <kernels::Policy P>
void BM_WeightedMoment(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0)), m = static_cast<int>(state.range(1));
    const Mat y = lifted_cloud(n, m, 4);
    const std::vector<double> w(m, 1.0 / m);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::weighted_moment(P, y, w));
    state.SetItemsProcessed(state.iterations() * m);
}

template <kernels::Policy P>
void BM_FwSolve(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0)), m = static_cast<int>(state.range(1));
    const PointCloud c(lifted_cloud(n, m, 5).topRows(n), Provenance::image);
    mvee::Options o;
    o.policy = P;
    for (auto _ : state) benchmark::DoNotOptimize(mvee::fw_solve(c, o).objective);
}

void kernel_args(benchmark::internal::Benchmark* b)
{
    for (const int n : {2, 6})
        for (const int m : {1000, 10000, 100000}) b->Args({n, m});
}

void solve_args(benchmark::internal::Benchmark* b)
{
    for (const int n : {2, 6})
        for (const int m : {200, 1000, 5000}) b->Args({n, m});
}

constexpr auto S = kernels::Policy::serial;
constexpr auto Par = kernels::Policy::parallel;

}  // namespace

BENCHMARK(BM_KappaFromScratch<S>)->Apply(kernel_args);
BENCHMARK(BM_KappaFromScratch<Par>)->Apply(kernel_args);
BENCHMARK(BM_KappaRankOne<S>)->Apply(kernel_args);
BENCHMARK(BM_KappaRankOne<Par>)->Apply(kernel_args);
BENCHMARK(BM_Argmax<S>)->Apply(kernel_args);
BENCHMARK(BM_Argmax<Par>)->Apply(kernel_args);
BENCHMARK(BM_WeightedMoment<S>)->Apply(kernel_args);
BENCHMARK(BM_WeightedMoment<Par>)->Apply(kernel_args);
BENCHMARK(BM_FwSolve<S>)->Apply(solve_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FwSolve<Par>)->Apply(solve_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
