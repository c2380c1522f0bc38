#include <doctest.h>

#include <cmath>

#include "msym/errors.hpp"
#include "msym/kernels.hpp"
#include "msym/ma_solver.hpp"

using namespace msym;

namespace {

double half_norm2(const Vec& x) { return 0.5 * x.squaredNorm(); }

double sup_error(const GridPotential& g, const ScalarField& exact) {
    const Domain& d = g.domain();
    double e = 0.0;
    for (std::size_t k = 0; k < d.node_count(); ++k)
        e = std::max(e, std::abs(g.nodal_values()[k] - exact.value(d.node(k))));
    return e;
}

}  // namespace

TEST_CASE("quadratic boundary data is reproduced without a Newton step") {
    Domain d = Domain::box(2, -1, 1, 17);
    const SolveResult r = solve_real_ma(d, 1.0, half_norm2);
    CHECK(r.iterations == 0);
    CHECK(r.det_history.front() < 1e-12);
    auto q = QuadraticPotential::flat(d);
    CHECK(sup_error(*r.potential, *q) < 1e-8);
}

TEST_CASE("non-isotropic quadratic with its own constant") {
    Domain d = Domain::box(2, -1, 1, 17);
    Mat A(2, 2);
    A << 2.0, 0.3, 0.3, 1.0;
    QuadraticPotential q(d, A);
    const SolveResult r = solve_real_ma(d, A.determinant(), [&](const Vec& x) { return q.value(x); });
    CHECK(r.det_history.front() < 1e-12);
    CHECK(sup_error(*r.potential, q) < 1e-8);
}

TEST_CASE("second-order convergence to the radial exact solution") {
    std::vector<double> err;
    for (int N : {17, 33, 65}) {
        Domain d = Domain::box(2, 1.0, 2.0, N);
        RadialMAPotential u(d, 1.0, 1.0);
        const SolveResult r = solve_real_ma(d, 1.0, [&](const Vec& x) { return u.value(x); });
        CHECK(r.converged);
        CHECK(r.det_history.back() <= 1e-9);
        err.push_back(sup_error(*r.potential, u));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("zero Dirichlet data on the square: observed convergence order") {
    // The solution has unbounded second derivatives at the corners, which
    // limits the center value to first-order convergence.
    std::vector<double> center;
    for (int N : {17, 33, 65}) {
        Domain d = Domain::box(2, -1.0, 1.0, N);
        const SolveResult r = solve_real_ma(d, 1.0, [](const Vec&) { return 0.0; });
        center.push_back(r.potential->value(d.center()));
        for (std::size_t k = 0; k < d.node_count(); ++k)
            if (!d.on_boundary(k, 1)) CHECK(r.min_eigenvalue[k] > 0.0);
    }
    CHECK(center[0] == doctest::Approx(-0.702952).epsilon(1e-5));
    const double ratio = (center[0] - center[1]) / (center[1] - center[2]);
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
}

TEST_CASE("damping engages and the residual history decreases strictly") {
    Domain d = Domain::box(2, -1, 1, 17);
    SolverOptions o;
    o.initial.resize(d.node_count());
    for (std::size_t k = 0; k < d.node_count(); ++k) o.initial[k] = half_norm2(d.node(k));
    const SolveResult r = solve_real_ma(d, 0.01, half_norm2, o);
    REQUIRE(r.residual_history.size() >= 3);
    CHECK(*std::min_element(r.step_lengths.begin(), r.step_lengths.end()) < 1.0);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i)
        CHECK(r.residual_history[i] < r.residual_history[i - 1]);
    const auto j = r.history_json();
    CHECK(j["residual_history"].size() == r.residual_history.size());
}

TEST_CASE("solver errors") {
    Domain d = Domain::box(2, -1, 1, 17);
    CHECK_THROWS_AS(solve_real_ma(d, -1.0, half_norm2), InvalidArgument);
    SolverOptions o;
    o.initial.assign(d.node_count(), 0.0);  // flat start: the discrete Hessian vanishes
    CHECK_THROWS_AS(solve_real_ma(d, 1.0, [](const Vec&) { return 0.0; }, o), LostConvexity);
    SolverOptions few;
    few.max_iterations = 1;
    CHECK_THROWS_AS(solve_real_ma(d, 1.0, [](const Vec&) { return 0.0; }, few), MaxIterations);
}

TEST_CASE("serial reference and OpenMP kernels agree bit for bit") {
    Domain d = Domain::box(2, -1, 1, 33);
    const std::vector<double> u = initial_guess(d, 1.0, [](const Vec&) { return 0.0; });
    const kernels::Stencil st(d);
    kernels::Linearization<double> a, b;
    kernels::serial::linearize(st, u, 1.0, a);
    kernels::parallel::linearize(st, u, 1.0, b);
    CHECK(a.F == b.F);
    CHECK(a.hinv == b.hinv);
    std::vector<double> x(st.nodes, 0.0), ya, yb;
    for (std::size_t i = 0; i < st.interior.size(); ++i) x[st.interior[i]] = std::sin(0.1 * i);
    kernels::serial::jacobian_apply(st, a, x, ya);
    kernels::parallel::jacobian_apply(st, a, x, yb);
    CHECK(ya == yb);

    SolverOptions ser, par;
    ser.parallel = false;
    const SolveResult rs = solve_real_ma(d, 1.0, [](const Vec&) { return 0.0; }, ser);
    const SolveResult rp = solve_real_ma(d, 1.0, [](const Vec&) { return 0.0; }, par);
    CHECK(rs.potential->nodal_values() == rp.potential->nodal_values());
}

TEST_CASE("linearized operator matches a finite difference of the residual") {
    Domain d = Domain::box(2, -1, 1, 17);
    const std::vector<double> u = initial_guess(d, 1.0, [](const Vec&) { return 0.0; });
    const kernels::Stencil st(d);
    kernels::Linearization<double> L0, Lp, Lm;
    kernels::serial::linearize(st, u, 1.0, L0);
    std::vector<double> dir(st.nodes, 0.0), up = u, um = u, y;
    for (std::size_t i = 0; i < st.interior.size(); ++i) {
        const Vec x = d.node(st.interior[i]);
        dir[st.interior[i]] = (1 - x(0) * x(0)) * (1 - x(1) * x(1)) * (1 + 0.5 * x(0));
    }
    const double eps = 1e-5;
    for (std::size_t k = 0; k < up.size(); ++k) {
        up[k] += eps * dir[k];
        um[k] -= eps * dir[k];
    }
    kernels::serial::linearize(st, up, 1.0, Lp);
    kernels::serial::linearize(st, um, 1.0, Lm);
    kernels::serial::jacobian_apply(st, L0, dir, y);
    double e = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) e = std::max(e, std::abs((Lp.F[i] - Lm.F[i]) / (2 * eps) - y[i]));
    CHECK(e < 1e-7);
}

TEST_CASE("complexified solver: real constant reduces to the real solver") {
    Domain d = Domain::box(2, -1, 1, 17);
    auto zero = [](const Vec&) { return 0.0; };
    const SolveResult real = solve_real_ma(d, 1.0, zero);
    const ComplexSolveResult cx = solve_complexified_ma(d, cplx(1.0, 0.0), zero);
    CHECK(cx.phi->nodal_values() == real.potential->nodal_values());
    for (double v : cx.eta->nodal_values()) CHECK(v == 0.0);
}

TEST_CASE("complexified solver: small phase by homotopy") {
    Domain d = Domain::box(2, -1, 1, 17);
    const double tau = 0.05;
    const ComplexSolveResult cx = solve_complexified_ma(d, std::polar(1.0, tau), [](const Vec&) { return 0.0; });
    CHECK(cx.final_residual < 1e-8);
    REQUIRE(cx.step_iterations.size() == 5);
    for (int it : cx.step_iterations) CHECK(it <= 10);
    double eta = 0.0;
    for (double v : cx.eta->nodal_values()) eta = std::max(eta, std::abs(v));
    CHECK(eta > 0.0);
    CHECK(eta < 2.0 * tau);
    // nodal residual through the geometry-level evaluator
    double r = 0.0;
    for (std::size_t k = 0; k < d.node_count(); ++k)
        if (!d.on_boundary(k, 2)) r = std::max(r, std::abs(complexified_residual(cx.potential, d.node(k))));
    CHECK(r < 1e-8);
}

TEST_CASE("convexity spectrum") {
    Domain d = Domain::box(2, -1, 1, 9);
    auto flat = QuadraticPotential::flat(d);
    for (double v : convexity_spectrum(GridPotential(sample_on_grid(*flat, d))))
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    Mat A(2, 2);
    A << 2, 0, 0, 1;
    QuadraticPotential q(d, A);
    for (double v : convexity_spectrum(GridPotential(sample_on_grid(q, d))))
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}
