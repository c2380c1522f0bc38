// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "msym/kernels.hpp"
#include "msym/ma_solver.hpp"
#include "msym/quadrature.hpp"

using namespace msym;

namespace {

struct Problem {
    Domain d;
    kernels::Stencil st;
    std::vector<double> u;
    kernels::Linearization<double> lin;
    std::vector<double> x;

    explicit Problem(int N) : d(Domain::box(2, 1.0, 2.0, N)), st(d) {
        RadialMAPotential exact(d, 1.0, 1.0);
        u = sample_on_grid(exact, d).values;
        kernels::serial::linearize(st, u, 1.0, lin);
        x.assign(st.nodes, 0.0);
        for (std::size_t i = 0; i < st.interior.size(); ++i) x[st.interior[i]] = std::sin(0.1 * double(i));
    }
};

template <bool Parallel>
void BM_linearize(benchmark::State& state) {
    Problem p(static_cast<int>(state.range(0)));
    kernels::Linearization<double> out;
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::linearize(p.st, p.u, 1.0, out);
        else
            kernels::serial::linearize(p.st, p.u, 1.0, out);
        benchmark::DoNotOptimize(out.F.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.st.interior.size()));
}

template <bool Parallel>
void BM_jacobian_apply(benchmark::State& state) {
    Problem p(static_cast<int>(state.range(0)));
    std::vector<double> y;
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::jacobian_apply(p.st, p.lin, p.x, y);
        else
            kernels::serial::jacobian_apply(p.st, p.lin, p.x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.st.interior.size()));
}

template <bool Parallel>
void BM_solve(benchmark::State& state) {
    const Domain d = Domain::box(2, 1.0, 2.0, static_cast<int>(state.range(0)));
    RadialMAPotential exact(d, 1.0, 1.0);
    SolverOptions opts;
    opts.parallel = Parallel;
    for (auto _ : state) {
        const SolveResult r = solve_real_ma(d, 1.0, [&](const Vec& x) { return exact.value(x); }, opts);
        benchmark::DoNotOptimize(r.iterations);
    }
}

template <bool Parallel>
void BM_quadrature(benchmark::State& state) {
    const Domain d = Domain::box(2, 1.0, 2.0);
    const Quadrature q = Quadrature::gauss(d, static_cast<int>(state.range(0)));
    RadialMAPotential phi(d, 1.0, 1.0);
    for (auto _ : state) {
        const double v = q.integrate<double>([&](const Vec& x) { return jet(phi, x).det_hessian; }, Parallel);
        benchmark::DoNotOptimize(v);
    }
}

}  // namespace

BENCHMARK(BM_linearize<false>)->Name("linearize/serial")->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_linearize<true>)->Name("linearize/parallel")->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_jacobian_apply<false>)->Name("jacobian_apply/serial")->Arg(65)->Arg(129);
BENCHMARK(BM_jacobian_apply<true>)->Name("jacobian_apply/parallel")->Arg(65)->Arg(129);
BENCHMARK(BM_solve<false>)->Name("solve/serial")->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve<true>)->Name("solve/parallel")->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_quadrature<false>)->Name("quadrature/serial")->Arg(32)->Arg(128);
BENCHMARK(BM_quadrature<true>)->Name("quadrature/parallel")->Arg(32)->Arg(128);

BENCHMARK_MAIN();
