#include <benchmark/benchmark.h>

#include <limits>

#include "evopf/solver.hpp"

namespace {

const double kInf = std::numeric_limits<double>::infinity();

evopf::ConicProgram norm_cone(int dim) {
    evopf::ConicProgram p;
    p.add_col("t", -kInf, kInf, 1.0);
    for (int i = 1; i < dim; ++i) {
        p.add_col("x" + std::to_string(i), static_cast<double>(i % 7) - 3.0,
                  static_cast<double>(i % 7) - 3.0);
    }
    p.add_cone(evopf::ConeKind::Soc, 0, dim);
    return p;
}

void bm_norm_cone(benchmark::State& state) {
    const evopf::ConicProgram p = norm_cone(static_cast<int>(state.range(0)));
    const evopf::SolverSettings settings;
    for (auto _ : state) {
        evopf::SolveOutcome out = evopf::solve(p, settings);
        benchmark::DoNotOptimize(out.objective);
    }
}

} // namespace

BENCHMARK(bm_norm_cone)->Arg(8)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
