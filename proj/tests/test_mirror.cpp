#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "msym/errors.hpp"
#include "msym/mirror.hpp"

using namespace msym;

namespace {

const cplx I1(0.0, 1.0);

std::vector<int> gens_of(unsigned m) {
    std::vector<int> g;
    for (int i = 0; i < 32; ++i)
        if (m >> i & 1u) g.push_back(i);
    return g;
}

std::shared_ptr<RadialMAPotential> radial() {
    return std::make_shared<RadialMAPotential>(Domain::box(2, 1.0, 2.0, 17), 1.0, 1.0);
}

ModuliVector random_xi(int n, std::mt19937_64& rng, int deg = 3) {
    return {std::make_shared<PolynomialField>(Polynomial::random(n, deg, rng, 0.5, false))};
}

// Independent construction of T: contract Omega_W from the right by d/dz_i
// for i in I ascending, then append sum_k P_jk dzbar_k for j in J ascending.
// Right contraction of a degree-d form is (-1)^{d-1} times the left one.
FormPoint transform_oracle(int n, unsigned mask, const Mat& P) {
    const unsigned I = dz_part(n, mask), J = dzbar_part(n, mask);
    FormPoint w = FormPoint::basis(2 * n, (1u << n) - 1u);
    for (int i : gens_of(I)) {
        const int deg = n - popcount(I & ((1u << i) - 1u));
        w = interior(w, i).scale(cplx((deg - 1) % 2 ? -1.0 : 1.0));
    }
    for (int jj : gens_of(J)) {
        FormPoint col(2 * n);
        for (int k = 0; k < n; ++k) col.c[1u << (n + k)] = P(jj, k);
        w = wedge(w, col);
    }
    return w;
}

struct Sample {
    PotentialPtr phi;
    JetFrame j;
};

std::vector<Sample> random_jets(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Sample> out;
    for (int i = 0; i < count; ++i) {
        Domain d = Domain::box(n, -1, 1);
        PotentialPtr phi = ExpQuadraticPotential::random(d, rng, 2, 0.4);
        for (const Vec& x : random_points(d, rng, 1)) out.push_back({phi, jet(*phi, x)});
    }
    return out;
}

TnForm omega_form(int n) {
    TnForm w(n, 1, 1, Side::M);
    for (int a = 0; a < n; ++a) w.add(1u << a, 1u << a, Coefficient::constant(n, 0.5 * I1));
    return w;
}

// (-2i)^n sum over sigma, rho of sgn sigma sgn rho prod_m alpha^m_{sigma(m) rho(m)}.
cplx yukawa_density_oracle(const std::vector<CMat>& alpha) {
    const int n = static_cast<int>(alpha.size());
    std::vector<int> s(n), r(n);
    auto sign = [](const std::vector<int>& v) {
        int sg = 1;
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b)
                if (v[a] > v[b]) sg = -sg;
        return sg;
    };
    cplx total = 0.0;
    std::iota(s.begin(), s.end(), 0);
    do {
        std::iota(r.begin(), r.end(), 0);
        do {
            cplx prod = double(sign(s) * sign(r));
            for (int m = 0; m < n; ++m) prod *= alpha[m](s[m], r[m]);
            total += prod;
        } while (std::next_permutation(r.begin(), r.end()));
    } while (std::next_permutation(s.begin(), s.end()));
    return std::pow(cplx(0.0, -2.0), n) * total;
}

double rel_stdev(const std::vector<cplx>& v) {
    cplx mean = 0.0;
    for (const cplx& z : v) mean += z;
    mean /= double(v.size());
    double var = 0.0;
    for (const cplx& z : v) var += std::norm(z - mean);
    return std::sqrt(var / v.size()) / std::abs(mean);
}

}  // namespace

TEST_CASE("transform generator examples") {
    const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
    const JetFrame j = jet(*flat, flat->center());
    const FormPoint t1 = transform(FormPoint::basis(4, 0b0001), j);  // dz^1
    FormPoint expect(4);
    expect.c[0b0010] = -1.0;  // -dz_2
    CHECK(sup_norm(t1 - expect) == 0.0);

    for (int n = 1; n <= 3; ++n) {
        const auto f = QuadraticPotential::flat(Domain::box(n, -1, 1));
        const JetFrame jn = jet(*f, f->center());
        const FormPoint one = transform(FormPoint::basis(2 * n, 0u), jn);
        CHECK(sup_norm(one - FormPoint::basis(2 * n, (1u << n) - 1u)) == 0.0);
        // T(dz^j) = (-1)^{n-j} dz_1 .. hat j .. dz_n with 1-based j
        for (int a = 0; a < n; ++a) {
            const FormPoint t = transform(FormPoint::basis(2 * n, 1u << a), jn);
            const double s = ((n - (a + 1)) % 2) ? -1.0 : 1.0;
            CHECK(sup_norm(t - FormPoint::basis(2 * n, ((1u << n) - 1u) & ~(1u << a), s)) == 0.0);
        }
    }

    const FormPoint tb = transform(FormPoint::basis(4, 0b0100), j);  // dzbar^1
    CHECK(sup_norm(tb - FormPoint::basis(4, 0b0111)) == 0.0);          // dz_1 dz_2 dzbar_1
}

TEST_CASE("transform matches the contraction oracle on the full basis") {
    for (int n = 1; n <= 3; ++n)
        for (const Sample& s : random_jets(n, 3, 40 + n))
            for (unsigned m = 0; m < (1u << (2 * n)); ++m) {
                const FormPoint t = transform(FormPoint::basis(2 * n, m), s.j);
                CHECK(sup_norm(t - transform_oracle(n, m, s.j.inverse_hessian)) < 1e-14);
                const int p = popcount(dz_part(n, m)), q = popcount(dzbar_part(n, m));
                CHECK(sup_norm(t - bidegree_part(t, n - p, q)) == 0.0);
            }
}

TEST_CASE("inverse transform sign is stable and recorded") {
    CHECK(inversion_sign(1) == 1);
    CHECK(inversion_sign(2) == -1);
    CHECK(inversion_sign(3) == -1);
    for (int n = 1; n <= 3; ++n)
        for (const Sample& s : random_jets(n, 3, 50 + n))
            for (unsigned m = 0; m < (1u << (2 * n)); ++m) {
                const FormPoint a = FormPoint::basis(2 * n, m);
                CHECK(sup_norm(inverse_transform(transform(a, s.j), s.j) - a) < 1e-12);
            }
}

TEST_CASE("adjoint of T under the density-weighted pairings") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int n = 1; n <= 3; ++n)
        for (const Sample& s : random_jets(n, 3, 60 + n))
            for (unsigned m = 0; m < (1u << (2 * n)); ++m) {
                const int p = popcount(dz_part(n, m)), q = popcount(dzbar_part(n, m));
                FormPoint a(2 * n), c(2 * n);
                for (unsigned I : subsets_of_size(n, p))
                    for (unsigned J : subsets_of_size(n, q)) a.c[form_mask(n, I, J)] = cplx(g(rng), g(rng));
                for (unsigned I : subsets_of_size(n, n - p))
                    for (unsigned J : subsets_of_size(n, q)) c.c[form_mask(n, I, J)] = cplx(g(rng), g(rng));
                const cplx w = pointwise_pairing(transform(a, s.j), c, s.j.hessian) *
                               volume_density(Side::W, s.j, 1.0);
                const cplx mside = pointwise_pairing(a, adjoint_transform(c, p, s.j), s.j.inverse_hessian) *
                                   volume_density(Side::M, s.j, 1.0);
                CHECK(std::abs(w - mside) < 1e-11 * std::max(1.0, std::abs(w)));
            }
}

TEST_CASE("T intertwines the B-triple on M with the A-triple on W") {
    const int n = 2;
    const std::vector<std::pair<OperatorTag, OperatorTag>> pairs = {
        {OperatorTag::H_A, OperatorTag::H_B}, {OperatorTag::L_A, OperatorTag::L_B},
        {OperatorTag::Lambda_A, OperatorTag::Lambda_B}};
    for (const Sample& s : random_jets(n, 10, 70))
        for (const auto& [a_op, b_op] : pairs)
            for (unsigned m = 0; m < 16u; ++m) {
                const FormPoint a = FormPoint::basis(4, m);
                const FormPoint lhs = apply(a_op, transform(a, s.j), Side::W, s.j);
                const FormPoint rhs = transform(apply(b_op, a, Side::M, s.j), s.j);
                CHECK(sup_norm(lhs - rhs) < 1e-10);
            }
}

TEST_CASE("dbar commutes with T up to the graded sign") {
    CHECK(dbar_commutation_sign(1) == -1);
    CHECK(dbar_commutation_sign(2) == 1);
    std::mt19937_64 rng(11);

    SUBCASE("constant form on flat background") {
        MirrorContext ctx(QuadraticPotential::flat(Domain::box(2, -1, 1)));
        const auto pts = random_points(ctx.phi->domain(), rng, 10);
        CHECK(dbar_commutation_residual(omega_form(2), ctx, pts) == 0.0);
    }
    SUBCASE("potential-induced forms on the radial Monge-Ampere solution") {
        MirrorContext ctx(radial());
        const auto pts = random_points(ctx.phi->domain(), rng, 20);
        for (int k = 0; k < 10; ++k)
            CHECK(dbar_commutation_residual(moduli_form(random_xi(2, rng), 2), ctx, pts) < 1e-9);
    }
    SUBCASE("random polynomial forms of every bidegree on a non-quadratic background") {
        for (int n = 1; n <= 3; ++n) {
            Domain d = Domain::box(n, -1, 1);
            MirrorContext ctx(ExpQuadraticPotential::random(d, rng, 2, 0.4));
            const auto pts = random_points(d, rng, 5);
            for (int p = 0; p <= n; ++p)
                for (int q = 0; p + q <= n; ++q) {
                    TnForm a(n, p, q, Side::M);
                    for (unsigned I : subsets_of_size(n, p))
                        for (unsigned J : subsets_of_size(n, q))
                            a.add(I, J, Coefficient(Polynomial::random(n, 2, rng, 1.0, true)));
                    CHECK(dbar_commutation_residual(a, ctx, pts) < 1e-10);
                }
        }
    }
}

TEST_CASE("symbolic transform evaluates like the pointwise one") {
    std::mt19937_64 rng(12);
    MirrorContext ctx(radial());
    const TnForm a = moduli_form(random_xi(2, rng), 2);
    const TnForm t = transform(a, ctx);
    CHECK(t.side() == Side::W);
    CHECK(t.p() == 1);
    CHECK(t.q() == 1);
    for (const Vec& x : random_points(ctx.phi->domain(), rng, 5))
        CHECK(sup_norm(t.value(x) - transform(a.value(x), jet(*ctx.phi, x))) < 1e-14);
    CHECK_THROWS_AS(transform(t, ctx), InvalidArgument);
}

TEST_CASE("weak dbar* commutation") {
    std::mt19937_64 rng(13);
    SUBCASE("constant form") {
        MirrorContext ctx(QuadraticPotential::flat(Domain::box(2, -1, 1, 9)));
        const Quadrature quad = Quadrature::gauss(ctx.phi->domain(), 4);
        CHECK(dbar_star_commutation_residual(omega_form(2), ctx, quad) < 1e-14);
    }
    SUBCASE("flat background, polynomial coefficients") {
        MirrorContext ctx(QuadraticPotential::flat(Domain::box(2, -1, 1, 9)));
        const Quadrature quad = Quadrature::gauss(ctx.phi->domain(), 6);
        for (int p = 0; p <= 2; ++p)
            for (int q = 1; p + q <= 2; ++q) {
                TnForm a(2, p, q, Side::M);
                for (unsigned I : subsets_of_size(2, p))
                    for (unsigned J : subsets_of_size(2, q))
                        a.add(I, J, Coefficient(Polynomial::random(2, 2, rng, 1.0, true)));
                CHECK(dbar_star_commutation_residual(a, ctx, quad, 2) < 1e-8);
            }
    }
    SUBCASE("potential-induced form on the radial solution") {
        MirrorContext ctx(radial());
        const Quadrature quad = Quadrature::gauss(ctx.phi->domain(), 8);
        CHECK(dbar_star_commutation_residual(moduli_form(random_xi(2, rng), 2), ctx, quad) < 1e-6);
    }
}

TEST_CASE("moduli map") {
    const auto flat = QuadraticPotential::flat(Domain::box(2, -1, 1));
    const JetFrame j = jet(*flat, Vec::Constant(2, 0.3));
    SUBCASE("xi = phi gives minus the identity") {
        const CMat B = moduli_map({flat}, j);
        CHECK(max_abs(B + CMat::Identity(2, 2)) < 1e-15);
    }
    SUBCASE("diag(2,0)") {
        Polynomial p(2);
        p.add_term({2, 0, 0, 0}, 1.0);
        const CMat B = moduli_map({std::make_shared<PolynomialField>(p)}, j);
        CMat expect = CMat::Zero(2, 2);
        expect(0, 0) = -2.0;
        CHECK(max_abs(B - expect) < 1e-15);
    }
    SUBCASE("matrix-product oracle at 100 points") {
        std::mt19937_64 rng(14);
        const auto phi = radial();
        const ModuliVector xi = random_xi(2, rng);
        double worst = 0.0;
        for (const Vec& x : random_points(phi->domain(), rng, 100)) {
            const JetFrame jj = jet(*phi, x);
            const Mat X = xi.xi->hessian(x);
            CMat oracle(2, 2);
            for (int a = 0; a < 2; ++a)
                for (int l = 0; l < 2; ++l) {
                    double s = 0.0;
                    for (int k = 0; k < 2; ++k) s += X(a, k) * jj.inverse_hessian(k, l);
                    oracle(a, l) = -s;
                }
            worst = std::max(worst, max_abs(moduli_map(xi, jj) - oracle));
        }
        CHECK(worst < 1e-12);
    }
    SUBCASE("B-field replaces phi by theta") {
        CMat theta(2, 2);
        theta << cplx(1, 0.2), cplx(0, 0.1), cplx(0, 0.1), cplx(1, -0.3);
        const CMat B = moduli_map({flat}, j, &theta);
        CHECK(max_abs(B + CMat(theta.inverse())) < 1e-15);
    }
}

TEST_CASE("moduli isometry") {
    std::mt19937_64 rng(15);
    SUBCASE("zero vectors") {
        MirrorContext ctx(QuadraticPotential::flat(Domain::box(2, -1, 1)));
        Polynomial zero(2);
        const ModuliVector z{std::make_shared<PolynomialField>(zero)};
        CHECK(moduli_isometry_residual(z, z, ctx, Quadrature::gauss(ctx.phi->domain(), 4)) == 0.0);
    }
    SUBCASE("flat background, xi = zeta = delta") {
        Domain d = Domain::box(2, -1, 1);
        d.lattice_covolume = 1.5;
        MirrorContext ctx(QuadraticPotential::flat(d), 1.5);
        const Quadrature quad = Quadrature::gauss(d, 4);
        const IsometryResult r = moduli_isometry({ctx.phi}, {ctx.phi}, ctx, quad);
        // 2 V * tr(Id) * vol(D) with V = covolume
        CHECK(r.m_side == doctest::Approx(2 * 1.5 * 2 * 4.0).epsilon(1e-13));
        CHECK(r.constant == doctest::Approx(1.5 * 1.5));
        CHECK(r.residual < 1e-10);
    }
    SUBCASE("random pairs on the radial solution") {
        MirrorContext ctx(radial());
        const Quadrature quad = Quadrature::gauss(ctx.phi->domain(), 8);
        for (int k = 0; k < 10; ++k)
            CHECK(moduli_isometry_residual(random_xi(2, rng), random_xi(2, rng), ctx, quad) < 1e-6);
    }
}

TEST_CASE("Yukawa couplings") {
    std::mt19937_64 rng(16);
    SUBCASE("flat n=2 with all inputs omega") {
        Domain d = Domain::box(2, -1, 1);
        MirrorContext ctx(QuadraticPotential::flat(d));
        const Quadrature quad = Quadrature::gauss(d, 3);
        const YukawaResult y = yukawa_A({omega_form(2), omega_form(2)}, ctx, quad);
        CHECK(std::abs(y.value - cplx(2.0 * 1.0 * 4.0)) < 1e-12);
        CHECK(y.integrand.size() == quad.size());
    }
    SUBCASE("zero input") {
        Domain d = Domain::box(2, -1, 1);
        MirrorContext ctx(QuadraticPotential::flat(d));
        const Quadrature quad = Quadrature::gauss(d, 3);
        const TnForm zero(2, 1, 1, Side::M);
        CHECK(std::abs(yukawa_A({omega_form(2), zero}, ctx, quad).value) == 0.0);
        CHECK(std::abs(yukawa_B({deformation_image(omega_form(2), ctx), deformation_image(zero, ctx)}, ctx, quad)
                           .value) == 0.0);
    }
    SUBCASE("A-side density matches the signed double-permutation sum") {
        std::normal_distribution<double> g;
        for (int n = 1; n <= 3; ++n)
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<CMat> alpha;
                std::vector<FormPoint> forms;
                for (int m = 0; m < n; ++m) {
                    CMat a(n, n);
                    FormPoint f(2 * n);
                    for (int r = 0; r < n; ++r)
                        for (int c = 0; c < n; ++c) {
                            a(r, c) = cplx(g(rng), g(rng));
                            f.c[form_mask(n, 1u << r, 1u << c)] = a(r, c);
                        }
                    alpha.push_back(a);
                    forms.push_back(f);
                }
                const cplx o = yukawa_density_oracle(alpha);
                CHECK(std::abs(top_coefficient_M(forms) - o) < 1e-12 * std::max(1.0, std::abs(o)));
            }
    }
    SUBCASE("errors") {
        Domain d = Domain::box(2, -1, 1);
        MirrorContext ctx(QuadraticPotential::flat(d));
        const Quadrature quad = Quadrature::gauss(d, 3);
        CHECK_THROWS_AS(yukawa_A({omega_form(2)}, ctx, quad), WrongArity);
        CHECK_THROWS_AS(yukawa_B({deformation_image(omega_form(2), ctx)}, ctx, quad), WrongArity);
        TnForm open(2, 1, 1, Side::M);  // x2 dz^1 dzbar^1 has dbar = 1/2 dzbar^2 ^ dz^1 dzbar^1
        open.add(1u, 1u, Coefficient(Polynomial::variable(2, 1)));
        CHECK_THROWS_AS(yukawa_A({open, omega_form(2)}, ctx, quad), NotClosed);
    }
    SUBCASE("A/B ratio is constant over random closed tuples") {
        const std::vector<std::pair<const char*, PotentialPtr>> backgrounds = {
            {"flat", QuadraticPotential::flat(Domain::box(2, -1, 1))}, {"radial", radial()}};
        for (const auto& [name, phi] : backgrounds) {
            CAPTURE(name);
            MirrorContext ctx(phi);
            const Quadrature quad = Quadrature::gauss(phi->domain(), 6);
            std::vector<cplx> ratios;
            for (int k = 0; k < 10; ++k) {
                std::vector<TnForm> forms;
                std::vector<BeltramiField> images;
                for (int m = 0; m < 2; ++m) {
                    forms.push_back(moduli_form(random_xi(2, rng), 2));
                    images.push_back(deformation_image(forms.back(), ctx));
                }
                ratios.push_back(yukawa_A(forms, ctx, quad).value / yukawa_B(images, ctx, quad).value);
            }
            CHECK(rel_stdev(ratios) < 1e-8);
        }
    }
}

TEST_CASE("prepotentials") {
    Domain d = Domain::box(2, 0, 1);
    MirrorContext ctx(QuadraticPotential::flat(d));
    const Quadrature quad = Quadrature::gauss(d, 3);
    CHECK(prepotential_A(ctx, quad) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(prepotential_B(ctx, quad)) == doctest::Approx(4.0).epsilon(1e-14));

    // same C = 1: the flat box and the radial solution
    const cplx r_flat = prepotential_B(ctx, quad) / prepotential_A(ctx, quad);
    MirrorContext rad(radial());
    const Quadrature rq = Quadrature::gauss(rad.phi->domain(), 6);
    const cplx r_rad = prepotential_B(rad, rq) / prepotential_A(rad, rq);
    CHECK(std::abs(r_flat - r_rad) < 1e-12);

    const MirrorCalibration cal = calibrate_mirror(2);
    CHECK(std::abs(cal.prepotential_ratio - r_flat) < 1e-12);
    CHECK(cal.inversion_sign == -1);
    CHECK(cal.to_json().at("n") == 2);
}

TEST_CASE("fiber L2 metric equals phi_jl vol(C)") {
    SUBCASE("flat, unit covolume") {
        MirrorContext ctx(QuadraticPotential::flat(Domain::box(2, -1, 1)));
        const JetFrame j = jet(*ctx.phi, Vec::Zero(2));
        const FiberMetric fm = fiber_l2_metric(ctx, j);
        CHECK(max_abs(fm.base - Mat::Identity(2, 2)) < 1e-14);
    }
    SUBCASE("Hess = diag(2,1)") {
        Domain d = Domain::box(2, -1, 1);
        Mat A = Mat::Zero(2, 2);
        A(0, 0) = 2.0;
        A(1, 1) = 1.0;
        MirrorContext ctx(std::make_shared<QuadraticPotential>(d, A));
        const JetFrame j = jet(*ctx.phi, Vec::Constant(2, 0.2));
        const FiberMetric fm = fiber_l2_metric(ctx, j, 5);
        CHECK(max_abs(fm.base - A * std::sqrt(2.0)) < 1e-8);
        CHECK(fm.mixed.cwiseAbs().maxCoeff() == 0.0);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) CHECK(fiber_l2_metric_residual(ctx, j, a, b, 5) < 1e-8);
    }
    SUBCASE("radial solution, mixed block identically zero") {
        MirrorContext ctx(radial(), 0.7);
        std::mt19937_64 rng(17);
        for (const Vec& x : random_points(ctx.phi->domain(), rng, 10)) {
            const JetFrame j = jet(*ctx.phi, x);
            const FiberMetric fm = fiber_l2_metric(ctx, j, 4);
            CHECK(max_abs(fm.base - j.hessian * fm.fiber_volume) < 1e-8);
            CHECK(fm.mixed.cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("Gross B-field checks") {
    std::mt19937_64 rng(18);
    SUBCASE("eta = 0") {
        Domain d = Domain::box(2, -1, 1);
        ComplexifiedPotential cp{QuadraticPotential::flat(d), std::make_shared<PolynomialField>(Polynomial(2)), 1.0};
        const GrossResiduals g = gross_bfield_checks(cp, random_points(d, rng, 10));
        CHECK(g.omega_invariance == 0.0);
        CHECK(g.zero_section == 0.0);
        CHECK(g.theta == 0.0);
    }
    SUBCASE("n = 1, eta = tau x^2 / 2") {
        const double tau = 0.3;
        Domain d = Domain::box(1, -1, 1);
        Polynomial eta(1);
        eta.add_term({2, 0, 0, 0}, 0.5 * tau);
        ComplexifiedPotential cp{QuadraticPotential::flat(d), std::make_shared<PolynomialField>(eta), 1.0};
        const GrossResiduals g = gross_bfield_checks(cp, random_points(d, rng, 10));
        CHECK(g.theta == doctest::Approx(-std::atan(tau)).epsilon(1e-14));
        CHECK(g.zero_section < 1e-15);
        CHECK(g.omega_invariance < 1e-15);
    }
    SUBCASE("analytic pairs: Omega Omegabar does not see eta") {
        for (int n = 1; n <= 3; ++n) {
            Domain d = Domain::box(n, -1, 1);
            ComplexifiedPotential cp{ExpQuadraticPotential::random(d, rng),
                                     std::make_shared<PolynomialField>(Polynomial::random(n, 3, rng, 0.3, false)),
                                     1.0};
            CHECK(gross_bfield_checks(cp, random_points(d, rng, 20)).omega_invariance < 1e-12);
        }
    }
    SUBCASE("product expansion oracle for Omega Omegabar") {
        // dz_j dzbar_j = -2i phi_jj dx^j dy_j for diagonal phi, and the blocks commute
        Mat H = Mat::Zero(3, 3);
        H.diagonal() << 1.5, 0.7, 2.0;
        Mat E = Mat::Zero(3, 3);
        E.diagonal() << 0.4, -0.2, 0.9;
        // Omega Omegabar = dz1 dz2 dz3 dzbar1 dzbar2 dzbar3 = (-1)^{3} prod_j dz_j dzbar_j
        const cplx expect = -std::pow(cplx(0, -2), 3) * H.diagonal().prod();
        CHECK(std::abs(omega_omegabar_W(H, E) - expect) < 1e-14);
    }
}

TEST_CASE("dbar commutation on grid-backed backgrounds holds at every resolution") {
    // The identity is algebraic in the jet (symmetric third derivatives), so
    // finite-difference jets satisfy it to roundoff instead of decaying in h.
    for (int res : {17, 33, 65}) {
        Domain d = Domain::box(2, 1.0, 2.0, res);
        const RadialMAPotential rad(d, 1.0, 1.0);
        MirrorContext ctx(std::make_shared<GridPotential>(sample_on_grid(rad, d), 1.0));
        std::mt19937_64 rng(19);
        const auto pts = random_points(d, rng, 20, 0.25);
        CHECK(dbar_commutation_residual(moduli_form(random_xi(2, rng), 2), ctx, pts) < 1e-12);
    }
}
