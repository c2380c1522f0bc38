#include <doctest.h>

#include <cmath>
#include <random>

#include "msym/connections.hpp"
#include "msym/cycles.hpp"
#include "msym/errors.hpp"

using namespace msym;

namespace {

const cplx kI(0.0, 1.0);

PotentialPtr quartic_1d() {
    // phi'' = 1 + x^2
    Polynomial p(1);
    p.add_term({2, 0, 0, 0}, 0.5);
    p.add_term({4, 0, 0, 0}, 1.0 / 12.0);
    return std::make_shared<PolynomialPotential>(Domain::box(1, -1, 1), p);
}

ScalarFieldPtr poly_field(int n, int deg, std::mt19937_64& rng, double scale = 0.5) {
    return std::make_shared<PolynomialField>(Polynomial::random(n, deg, rng, scale, false));
}

double max_abs3(const Tensor3& t, int n) {
    double r = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) r = std::max(r, std::abs(t(a, b, c)));
    return r;
}

CycleTangentForm dx(int n, int i, const Coefficient& c) {
    CycleTangentForm t(n, 1);
    t.add(1u << i, c);
    return t;
}

}  // namespace

TEST_CASE("A-connection Christoffels") {
    SUBCASE("quadratic potential has Gamma = 0 and zero curvature") {
        Mat A(2, 2);
        A << 2.0, 0.3, 0.3, 1.0;
        QuadraticPotential q(Domain::box(2, -1, 1), A);
        const JetFrame j = jet(q, Vec::Constant(2, 0.2));
        CHECK(max_abs3(a_connection(j).gamma, 2) == 0.0);
        CHECK(a_curvature_residual(q, Vec::Constant(2, 0.2)) == 0.0);
    }
    SUBCASE("n = 1, phi'' = 1 + x^2") {
        const PotentialPtr phi = quartic_1d();
        for (double x : {-0.7, -0.1, 0.0, 0.4, 0.9}) {
            const JetFrame j = jet(*phi, Vec::Constant(1, x));
            CHECK(a_connection(j).gamma(0, 0, 0) == doctest::Approx(2 * x / (1 + x * x)).epsilon(1e-14));
        }
    }
    SUBCASE("B-connection is zero") {
        CHECK(max_abs3(b_connection(3).gamma, 3) == 0.0);
        CHECK(b_connection(3).flavor == Connection::Flavor::B);
    }
}

TEST_CASE("A-connection is flat on analytic convex potentials") {
    std::mt19937_64 rng(21);
    for (int n = 1; n <= 3; ++n) {
        Domain d = Domain::box(n, -1, 1);
        for (int trial = 0; trial < 3; ++trial) {
            const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
            for (const Vec& x : random_points(d, rng, 3)) CHECK(a_curvature_residual(*phi, x) < 1e-8);
        }
    }
    // control: the Levi-Civita connection of the Hessian metric is not flat in general
    const auto phi = ExpQuadraticPotential::random(Domain::box(2, -1, 1), rng, 2, 0.4);
    const Vec x = Vec::Constant(2, 0.1);
    const Tensor3 LC = levi_civita(jet(*phi, x));
    CHECK(max_abs3(LC, 2) > 1e-3);
}

TEST_CASE("A-connection preserves omega_M") {
    std::mt19937_64 rng(22);
    QuadraticPotential q(Domain::box(2, -1, 1), Mat::Identity(2, 2));
    CHECK(nabla_omega_residual(jet(q, Vec::Zero(2))) == 0.0);
    for (int n = 1; n <= 3; ++n) {
        Domain d = Domain::box(n, -1, 1);
        const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
        for (const Vec& x : random_points(d, rng, 5)) {
            const JetFrame j = jet(*phi, x);
            CHECK(nabla_omega_residual(j) < 1e-12);
            if (n >= 2) {
                // antisymmetric in the lower indices: breaks torsion-freeness
                Tensor3 pert(n);
                pert(0, 0, 1) = 1e-3;
                pert(0, 1, 0) = -1e-3;
                CHECK(nabla_omega_residual(j, &pert) > 1e-4);
            }
        }
    }
}

TEST_CASE("A- and B-connections are exchanged by the Legendre transform") {
    std::mt19937_64 rng(23);
    SUBCASE("quadratic") {
        Mat A(2, 2);
        A << 2.0, 0.5, 0.5, 1.0;
        auto q = std::make_shared<QuadraticPotential>(Domain::box(2, -1, 1), A);
        const auto psi = legendre_dual(q);
        const JetFrame j = jet(*q, Vec::Constant(2, 0.3));
        const JetFrame dj = jet(*psi, j.gradient);
        CHECK(connection_duality_residual(j, dj) < 1e-15);
    }
    SUBCASE("n = 1 analytic") {
        const PotentialPtr phi = quartic_1d();
        const auto psi = legendre_dual(phi);
        for (double x : {-0.6, 0.2, 0.8}) {
            const JetFrame j = jet(*phi, Vec::Constant(1, x));
            const JetFrame dj = jet(*psi, j.gradient);
            CHECK(connection_duality_residual(j, dj) < 1e-9);
            CHECK(connection_duality_reverse_residual(j, dj) < 1e-8);
        }
    }
    SUBCASE("n = 2, 3 analytic") {
        for (int n = 2; n <= 3; ++n) {
            Domain d = Domain::box(n, -1, 1);
            const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
            const auto psi = legendre_dual(phi);
            for (const Vec& x : random_points(d, rng, 4)) {
                const JetFrame j = jet(*phi, x);
                const JetFrame dj = jet(*psi, j.gradient);
                CHECK(connection_duality_residual(j, dj) < 1e-9);
                CHECK(connection_duality_reverse_residual(j, dj) < 1e-8);
            }
        }
    }
}

TEST_CASE("Levi-Civita is the midpoint of the A- and B-connections") {
    std::mt19937_64 rng(24);
    for (int n = 1; n <= 3; ++n) {
        Domain d = Domain::box(n, -1, 1);
        const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
        for (const Vec& x : random_points(d, rng, 4)) {
            const JetFrame j = jet(*phi, x);
            CHECK(levi_civita_midpoint_residual(j) < 1e-10);
            // oracle: Christoffels of the second kind from FD metric derivatives
            const double h = 1e-4;
            std::vector<Mat> dg(n);
            for (int m = 0; m < n; ++m) {
                Vec xp = x, xm = x;
                xp[m] += h;
                xm[m] -= h;
                dg[m] = (phi->hessian(xp) - phi->hessian(xm)) / (2 * h);
            }
            const Tensor3 LC = levi_civita(j);
            for (int a = 0; a < n; ++a)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) {
                        double s = 0.0;
                        for (int k = 0; k < n; ++k)
                            s += 0.5 * j.inverse_hessian(a, k) * (dg[m](k, l) + dg[l](k, m) - dg[k](l, m));
                        CHECK(std::abs(LC(a, l, m) - s) < 1e-7);
                    }
        }
    }
}

TEST_CASE("covariant Hessian") {
    std::mt19937_64 rng(25);
    SUBCASE("flat background gives the ordinary Hessian") {
        const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
        const auto f = poly_field(2, 3, rng);
        const Vec x = Vec::Constant(2, 0.3);
        CHECK(max_abs(hess_A(*f, jet(*flat, x)) - f->hessian(x)) == 0.0);
    }
    SUBCASE("f = phi") {
        Domain d = Domain::box(2, -1, 1);
        const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
        const Vec x = Vec::Constant(2, -0.2);
        const JetFrame j = jet(*phi, x);
        Mat expect = j.hessian;
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k)
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q) expect(l, k) -= j.inverse_hessian(p, q) * j.third(l, k, p) * j.gradient[q];
        CHECK(max_abs(hess_A(*phi, j) - expect) < 1e-13);
        const auto flat = QuadraticPotential::flat(d);
        CHECK(max_abs(hess_A(*flat, jet(*flat, x)) - Mat::Identity(2, 2)) == 0.0);
    }
    SUBCASE("symmetric for random f") {
        for (int n = 1; n <= 3; ++n) {
            Domain d = Domain::box(n, -1, 1);
            const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
            const auto f = poly_field(n, 3, rng);
            for (const Vec& x : random_points(d, rng, 5)) {
                const Mat h = hess_A(*f, jet(*phi, x));
                CHECK(max_abs(h - h.transpose()) < 1e-12);
            }
        }
    }
}

TEST_CASE("special Lagrangian phase") {
    std::mt19937_64 rng(26);
    for (int n = 1; n <= 3; ++n) {
        Domain d = Domain::box(n, -1, 1);
        const auto flat = QuadraticPotential::flat(d);
        const Vec x = random_points(d, rng, 1)[0];
        const JetFrame j = jet(*flat, x);
        Polynomial zero(n), half(n), lin = Polynomial::random(n, 1, rng, 1.0, false);
        for (int a = 0; a < n; ++a) {
            Polynomial::Exponent e{};
            e[a] = 2;
            half.add_term(e, 0.5);
        }
        CHECK(slag_phase_residual({std::make_shared<PolynomialField>(zero), nullptr, 0.0}, j) == 0.0);
        const SLagSection s{std::make_shared<PolynomialField>(half), nullptr, -n * M_PI / 4};
        CHECK(slag_phase_residual(s, j) < 1e-15);
        CHECK(slag_average_phase(*flat, *s.f, random_points(d, rng, 5)) == doctest::Approx(-n * M_PI / 4));
        CHECK(slag_phase_residual({std::make_shared<PolynomialField>(lin), nullptr, 0.0}, j) == 0.0);
    }
}

TEST_CASE("Fourier transform of a section") {
    std::mt19937_64 rng(27);
    SUBCASE("linear f, e = 0, flat: y constant and F = 0") {
        const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
        const auto f = poly_field(2, 1, rng, 1.0);
        const UOneConnection u = fourier_transform_cycle({f, nullptr, 0.0}, flat);
        const UOnePoint p = u.at(Vec::Constant(2, 0.4));
        CHECK(max_abs(p.b - f->gradient(Vec::Zero(2))) < 1e-15);
        CHECK(sup_norm(curvature(p)) == 0.0);
    }
    SUBCASE("curvature matches the covariant Hessian and has no (0,2) part") {
        for (int n = 1; n <= 3; ++n) {
            Domain d = Domain::box(n, -1, 1);
            const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
            const SLagSection s{poly_field(n, 3, rng), poly_field(n, 3, rng), 0.0};
            const SLagSection s0{s.f, nullptr, 0.0};
            const UOneConnection u = fourier_transform_cycle(s, phi), u0 = fourier_transform_cycle(s0, phi);
            for (const Vec& x : random_points(d, rng, 5)) {
                const JetFrame j = jet(*phi, x);
                const UOnePoint p = u.at(x), p0 = u0.at(x);
                const Mat M = j.inverse_hessian * hess_A(*s.f, j) * j.inverse_hessian;
                CHECK(max_abs(p.db - M) < 1e-12);
                CHECK(max_abs(p.b - section_y(s, j)) < 1e-14);
                CHECK(sup_norm(curvature_02(p)) < 1e-15);
                CHECK(sup_norm(curvature(p) - curvature(p0)) < 1e-14);
            }
        }
    }
}

TEST_CASE("dHYM residual agrees with the special Lagrangian residual") {
    std::mt19937_64 rng(28);
    SUBCASE("F = 0, theta = 0") {
        const auto phi = ExpQuadraticPotential::random(Domain::box(2, -1, 1), rng, 2, 0.4);
        Polynomial zero(2);
        const UOneConnection u = fourier_transform_cycle({std::make_shared<PolynomialField>(zero), nullptr, 0.0}, phi);
        CHECK(dhym_residual(u, 0.0, *phi, random_points(phi->domain(), rng, 5)) < 1e-15);
    }
    SUBCASE("flat, f = |x|^2 / 2, theta = -n pi / 4") {
        for (int n = 1; n <= 3; ++n) {
            Domain d = Domain::box(n, -1, 1);
            const auto flat = QuadraticPotential::flat(d);
            Polynomial half(n);
            for (int a = 0; a < n; ++a) {
                Polynomial::Exponent e{};
                e[a] = 2;
                half.add_term(e, 0.5);
            }
            const UOneConnection u = fourier_transform_cycle({std::make_shared<PolynomialField>(half), nullptr, 0.0}, flat);
            CHECK(dhym_residual(u, -n * M_PI / 4, *flat, random_points(d, rng, 5)) < 1e-14);
        }
    }
    SUBCASE("50 random triples") {
        std::uniform_real_distribution<double> th(-M_PI, M_PI);
        for (int t = 0; t < 50; ++t) {
            const int n = 1 + t % 3;
            Domain d = Domain::box(n, -1, 1);
            const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
            const SLagSection s{poly_field(n, 3, rng), nullptr, th(rng)};
            const UOneConnection u = fourier_transform_cycle(s, phi);
            const Vec x = random_points(d, rng, 1)[0];
            const JetFrame j = jet(*phi, x);
            const cplx det = (j.hessian.cast<cplx>() + kI * hess_A(*s.f, j).cast<cplx>()).determinant();
            CHECK(std::abs(dhym_quantity(u.at(x), j) - det) < 1e-10 * std::max(1.0, std::abs(det)));
            CHECK(std::abs(dhym_residual(u, s.theta, *phi, {x}) - slag_phase_residual(s, j)) < 1e-9);
        }
    }
}

TEST_CASE("tangent transform and deformed harmonic forms") {
    std::mt19937_64 rng(29);
    SUBCASE("constant dx^j on flat background") {
        const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
        for (int i = 0; i < 2; ++i) {
            const TnForm B = tangent_transform(dx(2, i, Coefficient::constant(2, 1.0)), flat);
            CHECK(B.side() == Side::W);
            CHECK(B.p() == 0);
            CHECK(sup_norm(B.value(Vec::Zero(2)) - FormPoint::basis(4, 1u << (2 + i), 0.5 * kI)) == 0.0);
            const auto r = deformed_harmonic_residual(B, 0.0, *flat, nullptr, random_points(flat->domain(), rng, 5));
            CHECK(r.first == 0.0);
            CHECK(r.second == 0.0);
        }
    }
    SUBCASE("q = 0 constant function") {
        const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
        CycleTangentForm c(2, 0);
        c.add(0u, Coefficient::constant(2, 1.0));
        const auto r = deformed_harmonic_residual(tangent_transform(c, flat), 0.0, *flat, nullptr,
                                                  random_points(flat->domain(), rng, 5));
        CHECK(r.first == 0.0);
        CHECK(r.second == 0.0);
    }
    SUBCASE("images of harmonic one-forms dg") {
        // harmonic g: x1^2 - x2^2 + 0.3 x1 x2 + x1^3 - 3 x1 x2^2
        Polynomial g(2);
        g.add_term({2, 0, 0, 0}, 1.0);
        g.add_term({0, 2, 0, 0}, -1.0);
        g.add_term({1, 1, 0, 0}, 0.3);
        g.add_term({3, 0, 0, 0}, 1.0);
        g.add_term({1, 2, 0, 0}, -3.0);
        const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
        // complex coefficients: for real g the top form is real whatever g is,
        // so the phase condition only sees the Laplacian through Im
        const cplx c(1.0, 1.0);
        CycleTangentForm a(2, 1);
        for (int i = 0; i < 2; ++i) a.add(1u << i, c * Coefficient(g.derivative(i)));
        const auto r = deformed_harmonic_residual(tangent_transform(a, flat), 0.0, *flat, nullptr,
                                                  random_points(flat->domain(), rng, 10));
        CHECK(r.first < 1e-8);
        CHECK(r.second < 1e-8);
        // a non-harmonic potential fails the second condition
        Polynomial h(2);
        h.add_term({2, 0, 0, 0}, 1.0);
        CycleTangentForm b(2, 1);
        for (int i = 0; i < 2; ++i) b.add(1u << i, c * Coefficient(h.derivative(i)));
        CHECK(deformed_harmonic_residual(tangent_transform(b, flat), 0.0, *flat, nullptr,
                                         random_points(flat->domain(), rng, 3))
                  .second > 0.1);
    }
    SUBCASE("the transform is multiplicative") {
        const int n = 3;
        Domain d = Domain::box(n, -1, 1);
        const auto phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
        CycleTangentForm a(n, 1), b(n, 1);
        for (int i = 0; i < n; ++i) {
            a.add(1u << i, Coefficient(Polynomial::random(n, 2, rng, 1.0, false)));
            b.add(1u << i, Coefficient(Polynomial::random(n, 2, rng, 1.0, false)));
        }
        for (const Vec& x : random_points(d, rng, 4)) {
            const JetFrame j = jet(*phi, x);
            const ExtVec<Field> ab = wedge(a.at(x), b.at(x));
            const FormPoint lhs = values(tangent_transform_at(ab, j));
            const FormPoint rhs = wedge(values(tangent_transform_at(a.at(x), j)), values(tangent_transform_at(b.at(x), j)));
            CHECK(sup_norm(lhs - rhs) < 1e-14);
        }
    }
}

TEST_CASE("correlation functions") {
    std::mt19937_64 rng(30);
    const cplx kappa = correlation_calibration(2);
    SUBCASE("n = 2 flat, alpha_i = dx^i") {
        Domain d = Domain::box(2, -1, 1);
        MirrorContext ctx(QuadraticPotential::flat(d));
        const Quadrature quad = Quadrature::gauss(d, 3);
        const std::vector<CycleTangentForm> a = {dx(2, 0, Coefficient::constant(2, 1.0)),
                                                 dx(2, 1, Coefficient::constant(2, 1.0))};
        CHECK(std::abs(correlation_A(a, quad) - cplx(4.0)) < 1e-14);
        CHECK(correlation_residual(a, ctx, quad, kappa) < 1e-13);
    }
    SUBCASE("zero input and antisymmetry") {
        Domain d = Domain::box(2, -1, 1);
        MirrorContext ctx(ExpQuadraticPotential::random(d, rng, 2, 0.4));
        const Quadrature quad = Quadrature::gauss(d, 4);
        CycleTangentForm a(2, 1), b(2, 1), z(2, 1);
        for (int i = 0; i < 2; ++i) {
            a.add(1u << i, Coefficient(Polynomial::random(2, 2, rng, 1.0, false)));
            b.add(1u << i, Coefficient(Polynomial::random(2, 2, rng, 1.0, false)));
        }
        CHECK(std::abs(correlation_A({a, z}, quad)) == 0.0);
        CHECK(std::abs(correlation_B({a, z}, ctx, quad)) == 0.0);
        CHECK(std::abs(correlation_A({a, b}, quad) + correlation_A({b, a}, quad)) < 1e-13);
        CHECK(std::abs(correlation_B({a, b}, ctx, quad) + correlation_B({b, a}, ctx, quad)) < 1e-13);
        CHECK(correlation_residual({a, b}, ctx, quad, kappa) < 1e-6);
        CHECK_THROWS_AS(correlation_A({a}, quad), WrongArity);
    }
}

TEST_CASE("duality on grid-backed Monge-Ampere backgrounds") {
    // The duality residual is algebraic in the jet and stays at roundoff on
    // grids; the refinement order shows up in the Christoffels themselves.
    std::vector<double> errs;
    for (int res : {17, 33, 65}) {
        Domain d = Domain::box(2, 1.0, 2.0, res);
        const RadialMAPotential rad(d, 1.0, 1.0);
        const auto g = std::make_shared<GridPotential>(sample_on_grid(rad, d), 1.0);
        const auto psi = legendre_dual(g);
        double err = 0.0;
        // nodes common to all three grids, so interpolation does not enter
        std::vector<Vec> pts;
        for (double a : {1.3125, 1.5, 1.6875})
            for (double b : {1.375, 1.625}) pts.push_back((Vec(2) << a, b).finished());
        for (const Vec& x : pts) {
            const JetFrame j = jet(*g, x);
            CHECK(connection_duality_residual(j, jet(*psi, j.gradient)) < 1e-12);
            const Tensor3 a = a_connection(j).gamma, b = a_connection(jet(rad, x)).gamma;
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q)
                    for (int r = 0; r < 2; ++r) err = std::max(err, std::abs(a(p, q, r) - b(p, q, r)));
        }
        errs.push_back(err);
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        const double ratio = errs[k - 1] / errs[k];
        CHECK(ratio > 3.2);
        CHECK(ratio < 4.8);
    }
}
