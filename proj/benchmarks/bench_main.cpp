// Microbenchmarks for the hot paths: operator application, shifted CG solves,
// parabolic stepping, eigensolves, Lorentz norms, and the best-ball scan.
//
//   fklab_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "fklab/elliptic.hpp"
#include "fklab/geometry.hpp"
#include "fklab/lorentz.hpp"
#include "fklab/spectral.hpp"
#include "fklab/stochastic.hpp"
#include "fklab/verify.hpp"

namespace {

using namespace fklab;

DiscreteOperator square_op(int cells_per_side) {
    const double h = 1.0 / cells_per_side;
    return assemble_operator(
        identity_coefficients(build_domain(DomainSpec::make_box(2, {1, 1, 1}), h)));
}

DiscreteOperator cube_op(int cells_per_side) {
    const double h = 1.0 / cells_per_side;
    return assemble_operator(
        identity_coefficients(build_domain(DomainSpec::make_box(3, {1, 1, 1}), h)));
}

ScalarField random_field(std::shared_ptr<const DomainMask> mask, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ScalarField f;
    f.mask = std::move(mask);
    f.unit = "1/length^2";
    f.v.resize(f.mask->cell_count());
    for (double& x : f.v) x = uni(rng);
    return f;
}

void bm_operator_apply(benchmark::State& state) {
    const auto op = square_op(static_cast<int>(state.range(0)));
    std::vector<double> x(op.size(), 1.0), y(op.size());
    for (auto _ : state) {
        op.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(op.size()));
}
BENCHMARK(bm_operator_apply)->Arg(64)->Arg(128)->Arg(256);

void bm_operator_apply_3d(benchmark::State& state) {
    const auto op = cube_op(static_cast<int>(state.range(0)));
    std::vector<double> x(op.size(), 1.0), y(op.size());
    for (auto _ : state) {
        op.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(op.size()));
}
BENCHMARK(bm_operator_apply_3d)->Arg(16)->Arg(32);

void bm_cg_solve(benchmark::State& state) {
    const auto op = square_op(static_cast<int>(state.range(0)));
    const std::vector<double> rhs(op.size(), 1.0);
    for (auto _ : state) {
        auto x = solve_shifted(op, 1.0, rhs, 1e-10);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(bm_cg_solve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void bm_parabolic_step(benchmark::State& state) {
    const auto op = square_op(static_cast<int>(state.range(0)));
    const std::vector<double> state0(op.size(), 1.0);
    const double dt = op.h * op.h;
    for (auto _ : state) {
        auto next = step_parabolic(op, nullptr, state0, dt, 0.5);
        benchmark::DoNotOptimize(next.data());
    }
}
BENCHMARK(bm_parabolic_step)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void bm_principal_eigenpair(benchmark::State& state) {
    const auto op = square_op(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto pair = principal_eigenpair(op);
        benchmark::DoNotOptimize(pair.lambda);
    }
}
BENCHMARK(bm_principal_eigenpair)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void bm_survival_curve(benchmark::State& state) {
    const auto op = square_op(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto curve = survival_curve(op, {0.5, 0.5, 0.0}, 0.06);
        benchmark::DoNotOptimize(curve.p.data());
    }
}
BENCHMARK(bm_survival_curve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void bm_lorentz_norm(benchmark::State& state) {
    auto mask = build_domain(DomainSpec::make_box(3, {1, 1, 1}),
                             1.0 / static_cast<double>(state.range(0)));
    const auto f = random_field(mask, 12345);
    Region region{f.mask, {}};
    for (auto _ : state) {
        const double norm = lorentz_norm(f, region, 1.5, 1.0);
        benchmark::DoNotOptimize(norm);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(f.v.size()));
}
BENCHMARK(bm_lorentz_norm)->Arg(16)->Arg(32);

void bm_best_ball_lorentz(benchmark::State& state) {
    auto mask = build_domain(DomainSpec::make_box(3, {1, 1, 1}),
                             1.0 / static_cast<double>(state.range(0)));
    const auto f = random_field(mask, 777);
    for (auto _ : state) {
        auto best = best_ball_lorentz(f, 0.2, 1.5);
        benchmark::DoNotOptimize(best.value);
    }
}
BENCHMARK(bm_best_ball_lorentz)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void bm_simulate_paths(benchmark::State& state) {
    const auto op = square_op(32);
    for (auto _ : state) {
        auto paths = simulate_paths(op, nullptr, {0.5, 0.5, 0.0}, 0.06,
                                    static_cast<int>(state.range(0)), 99);
        benchmark::DoNotOptimize(paths.data());
    }
}
BENCHMARK(bm_simulate_paths)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
