#include "msym/report.hpp"

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "msym/automorphisms.hpp"
#include "msym/connections.hpp"
#include "msym/cycles.hpp"
#include "msym/errors.hpp"
#include "msym/forms.hpp"
#include "msym/hyperkahler.hpp"
#include "msym/ma_solver.hpp"
#include "msym/mirror.hpp"
#include "msym/quadrature.hpp"

namespace msym {

using nlohmann::json;

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s = {"legendre", "ma",          "mirror-forms", "sl2",
                                               "yukawa",   "moduli",      "connections",  "cycles",
                                               "hyperkahler", "automorphisms", "bfield"};
    return s;
}

// ---------------------------------------------------------------- config

SuiteConfig SuiteConfig::from_json(const json& j, const std::string& base_dir) {
    SuiteConfig c;
    c.base_dir = base_dir;
    try {
        c.n = j.value("n", 2);
        if (j.contains("bounds"))
            for (const auto& b : j.at("bounds")) c.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
        if (j.contains("potential")) {
            const json& p = j.at("potential");
            c.potential.kind = p.value("kind", std::string("flat"));
            c.potential.params = p;
        }
        c.covolume = j.value("covolume", 1.0);
        c.grid_resolution = j.value("grid_resolution", 17);
        c.fiber_resolution = j.value("fiber_resolution", 8);
        if (j.contains("suites")) c.suites = j.at("suites").get<std::vector<std::string>>();
        if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
        if (j.contains("tolerance")) c.global_tolerance = j.at("tolerance").get<double>();
        c.seed = j.value("seed", std::uint64_t{42});
        c.timing = j.value("timing", true);
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    return c;
}

SuiteConfig SuiteConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j, std::filesystem::path(path).parent_path().string());
}

json SuiteConfig::to_json() const {
    json j;
    j["n"] = n;
    j["bounds"] = json::array();
    for (const auto& [lo, hi] : bounds) j["bounds"].push_back({lo, hi});
    j["potential"] = potential.params;
    j["potential"]["kind"] = potential.kind;
    j["covolume"] = covolume;
    j["grid_resolution"] = grid_resolution;
    j["fiber_resolution"] = fiber_resolution;
    j["suites"] = suites;
    j["tolerances"] = tolerances;
    if (global_tolerance) j["tolerance"] = *global_tolerance;
    j["seed"] = seed;
    j["timing"] = timing;
    return j;
}

Domain SuiteConfig::domain() const {
    Domain d = Domain::box(n, -1.0, 1.0, grid_resolution);
    if (!bounds.empty()) d.bounds = bounds;
    d.lattice_covolume = covolume;
    d.fiber_resolution = fiber_resolution;
    return d;
}

namespace {

std::string resolve(const SuiteConfig& c, const std::string& p) {
    if (std::filesystem::path(p).is_absolute() || c.base_dir.empty()) return p;
    return (std::filesystem::path(c.base_dir) / p).string();
}

}  // namespace

void SuiteConfig::validate() const {
    if (n < 1 || n > 3) throw ConfigError("n must be 1, 2 or 3");
    if (!bounds.empty() && static_cast<int>(bounds.size()) != n) throw ConfigError("bounds must list one interval per axis");
    if (!(covolume > 0)) throw ConfigError("covolume must be positive");
    for (const auto& s : suites)
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw ConfigError("unknown suite '" + s + "'");
    for (const auto& [s, t] : tolerances) {
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw ConfigError("tolerance for unknown suite '" + s + "'");
        if (!(t > 0)) throw ConfigError("tolerance for '" + s + "' must be positive");
    }
    if (global_tolerance && !(*global_tolerance > 0)) throw ConfigError("--tol must be positive");
    if (potential.kind == "grid") {
        const std::string path = resolve(*this, potential.params.value("path", std::string()));
        if (path.empty() || !std::filesystem::exists(path)) throw ConfigError("grid file not found: " + path);
    }
    try {
        domain().validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

PotentialPtr build_potential(const SuiteConfig& c) {
    const Domain d = c.domain();
    const json& p = c.potential.params;
    const std::string& k = c.potential.kind;
    try {
        if (k == "flat") return QuadraticPotential::flat(d);
        if (k == "quadratic") {
            Mat A = Mat::Identity(d.n, d.n);
            Vec b = Vec::Zero(d.n);
            if (p.contains("A"))
                for (int r = 0; r < d.n; ++r)
                    for (int s = 0; s < d.n; ++s) A(r, s) = p.at("A").at(r).at(s).get<double>();
            if (p.contains("b"))
                for (int r = 0; r < d.n; ++r) b[r] = p.at("b").at(r).get<double>();
            return std::make_shared<QuadraticPotential>(d, A, b, p.value("c", 0.0));
        }
        if (k == "polynomial") return std::make_shared<PolynomialPotential>(d, Polynomial::from_json(p.at("polynomial")));
        if (k == "exp-quadratic") {
            std::mt19937_64 rng(p.value("seed", std::uint64_t{7}));
            return ExpQuadraticPotential::random(d, rng, p.value("terms", 2), p.value("strength", 0.3));
        }
        if (k == "radial") return std::make_shared<RadialMAPotential>(d, p.value("C", 1.0), p.value("beta", 1.0));
        if (k == "grid") {
            GridData g = load_grid_csv(resolve(c, p.at("path").get<std::string>()));
            g.domain.lattice_covolume = c.covolume;
            g.domain.fiber_resolution = c.fiber_resolution;
            if (g.domain.n != c.n) throw ConfigError("grid file dimension differs from n");
            return std::make_shared<GridPotential>(std::move(g), p.value("C", 1.0));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("potential: ") + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown potential kind '" + k + "'");
}

// ---------------------------------------------------------------- suites

namespace {

constexpr double kExact = DBL_MIN;  // "residual exactly 0" expressed as a positive tolerance

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

class SuiteRun {
public:
    SuiteRun(const SuiteConfig& c, const std::string& suite, PotentialPtr phi)
        : cfg(c), name(suite), phi(std::move(phi)), rng(c.seed ^ fnv1a(suite)) {}

    const SuiteConfig& cfg;
    std::string name;
    PotentialPtr phi;
    std::mt19937_64 rng;
    std::vector<CheckRecord> records;

    int n() const { return phi->dim(); }
    bool is_grid() const { return phi->kind() == PotentialKind::Grid; }

    // body returns (max residual, samples)
    void check(const std::string& check, const std::string& anchor, double tol,
               const std::function<std::pair<double, long>()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto [res, samples] = body();
        const auto t1 = std::chrono::steady_clock::now();
        double t = tol;
        if (auto it = cfg.tolerances.find(name); it != cfg.tolerances.end()) t = it->second;
        if (cfg.global_tolerance) t = *cfg.global_tolerance;
        CheckRecord r{name, check, anchor, res, t, res <= t, samples, 0.0};
        if (cfg.timing) r.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        records.push_back(r);
    }

    // Random points where jets may be taken.
    std::vector<Vec> points(int count) {
        const Domain& d = phi->domain();
        double margin = 0.1 * d.length(0);
        if (is_grid()) margin = std::max(margin, 3.0 * d.spacing(0));
        std::vector<Vec> out;
        while (static_cast<int>(out.size()) < count)
            for (const Vec& x : random_points(d, rng, count - static_cast<int>(out.size()), margin))
                if (phi->jet_admissible(x)) out.push_back(x);
        return out;
    }

    Quadrature quadrature(int per_axis) const {
        return is_grid() ? Quadrature::trapezoid(phi->domain(), 2) : Quadrature::gauss(phi->domain(), per_axis);
    }

    ScalarFieldPtr random_field(int deg, double scale = 0.5) {
        return std::make_shared<PolynomialField>(Polynomial::random(n(), deg, rng, scale, false));
    }
};

double rel_stdev(const std::vector<cplx>& v) {
    cplx mean = 0.0;
    for (const cplx& z : v) mean += z;
    mean /= double(v.size());
    double var = 0.0;
    for (const cplx& z : v) var += std::norm(z - mean);
    return std::sqrt(var / double(v.size())) / std::abs(mean);
}

// ------------------------------------------------ legendre

void suite_legendre(SuiteRun& s) {
    const int n = s.n();
    const double h = s.phi->domain().spacing(0);
    const double tol = s.is_grid() ? 5.0 * h * h : 1e-10;
    const auto psi = legendre_dual(s.phi);
    const auto phi2 = legendre_dual(psi);
    const auto pts = s.points(20);
    const Vec x0 = pts.front();
    const double shift = phi2->value(x0) - s.phi->value(x0);
    s.check("involution", "the transformation of psi is phi again", tol, [&] {
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, std::abs(phi2->value(x) - s.phi->value(x) - shift));
        return std::pair{r, long(pts.size())};
    });
    s.check("gradient_inverse", "called the Legendre transformation of the function", tol, [&] {
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, max_abs(psi->gradient(s.phi->gradient(x)) - x));
        return std::pair{r, long(pts.size())};
    });
    s.check("hessian_duality", "called the Legendre transformation of the function", tol, [&] {
        double r = 0.0;
        for (const Vec& x : pts) {
            const JetFrame j = jet(*s.phi, x);
            r = std::max(r, max_abs(psi->hessian(j.gradient) * j.hessian - Mat::Identity(n, n)));
        }
        return std::pair{r, long(pts.size())};
    });
}

// ------------------------------------------------ ma

void suite_ma(SuiteRun& s) {
    const int n = s.n();
    Domain d = s.phi->domain();
    Mat A = Mat::Identity(n, n);
    for (int a = 0; a + 1 < n; ++a) A(a, a + 1) = A(a + 1, a) = 0.2;
    const Vec b = Vec::Constant(n, 0.1);
    auto q = [A, b](const Vec& x) { return 0.5 * x.dot(A * x) + b.dot(x); };
    s.check("quadratic_exactness", "an elliptic solution to the real Monge-Ampere equation", 1e-12, [&] {
        const SolveResult r = solve_real_ma(d, A.determinant(), q);
        double e = 0.0;
        for (std::size_t k = 0; k < d.node_count(); ++k) e = std::max(e, std::abs(r.potential->nodal_values()[k] - q(d.node(k))));
        return std::pair{e, long(d.node_count())};
    });
    const double C = s.phi->target_constant();
    SolverOptions opts;
    s.check("dirichlet_solve", "a unique elliptic solution", opts.tolerance, [&] {
        const PotentialPtr phi = s.phi;
        const SolveResult r = solve_real_ma(d, C, [phi](const Vec& x) { return phi->value(x); }, opts);
        return std::pair{grid_ma_residual(*r.potential, C), long(r.iterations)};
    });
}

// ------------------------------------------------ mirror forms

void suite_mirror_forms(SuiteRun& s) {
    const int n = s.n();
    MirrorContext ctx(s.phi, s.cfg.covolume);
    const auto pts = s.points(10);
    s.check("dbar_commutation", "descends to both the Hodge cohomology", 1e-9, [&] {
        double r = 0.0;
        for (int k = 0; k < 10; ++k)
            r = std::max(r, dbar_commutation_residual(moduli_form({s.random_field(3)}, n), ctx, pts));
        return std::pair{r, 10L * long(pts.size())};
    });
    s.check("dbar_star_commutation", "We can also verify", 1e-6, [&] {
        const Quadrature quad = s.quadrature(4);
        double r = 0.0;
        for (int k = 0; k < 3; ++k)
            r = std::max(r, dbar_star_commutation_residual(moduli_form({s.random_field(3)}, n), ctx, quad));
        return std::pair{r, 3L};
    });
    s.check("inversion_sign", "Explicitly if", 1e-12, [&] {
        double r = 0.0;
        const double sg = inversion_sign(n);
        for (const Vec& x : pts) {
            const JetFrame j = jet(*s.phi, x);
            for (unsigned m = 0; m < (1u << (2 * n)); ++m) {
                FormPoint a = FormPoint::basis(2 * n, m);
                FormPoint back = transform_prime(transform(a, j), j);
                r = std::max(r, sup_norm(back - a.scale(cplx(sg))));
            }
        }
        return std::pair{r, long(pts.size()) << (2 * n)};
    });
}

// ------------------------------------------------ sl2

void suite_sl2(SuiteRun& s) {
    using T = OperatorTag;
    const int n = s.n();
    const auto pts = s.points(10);
    std::vector<JetFrame> jets;
    for (const Vec& x : pts) jets.push_back(jet(*s.phi, x));
    const unsigned dim = 1u << (2 * n);
    using Op = std::function<FormPoint(const FormPoint&, Side, const JetFrame&)>;
    auto A = [](T t) -> Op { return [t](const FormPoint& a, Side sd, const JetFrame& j) { return apply(t, a, sd, j); }; };
    auto comm = [](Op x, Op y) -> Op {
        return [x, y](const FormPoint& a, Side sd, const JetFrame& j) { return x(y(a, sd, j), sd, j) - y(x(a, sd, j), sd, j); };
    };
    auto measure = [&](const std::string& name, const std::string& anchor, const Op& residual_op) {
        s.check(name, anchor, 1e-10, [&] {
            double r = 0.0;
            for (const JetFrame& j : jets)
                for (Side sd : {Side::M, Side::W})
                    for (unsigned m = 0; m < dim; ++m) r = std::max(r, sup_norm(residual_op(FormPoint::basis(2 * n, m), sd, j)));
            return std::pair{r, long(jets.size()) * 2 * long(dim)};
        });
    };
    const char* anchor_sl2 = "define an sl(2) action on";
    for (auto [tag, L, La, H] : {std::tuple{"A", T::L_A, T::Lambda_A, T::H_A}, std::tuple{"B", T::L_B, T::Lambda_B, T::H_B}}) {
        const Op l = A(L), la = A(La), hh = A(H);
        measure(std::string(tag) + ":[L,Lambda]-H", anchor_sl2, [=](const FormPoint& a, Side sd, const JetFrame& j) {
            return comm(l, la)(a, sd, j) - hh(a, sd, j);
        });
        measure(std::string(tag) + ":[H,L]+2L", anchor_sl2, [=](const FormPoint& a, Side sd, const JetFrame& j) {
            return comm(hh, l)(a, sd, j) + l(a, sd, j).scale(2.0);
        });
        measure(std::string(tag) + ":[H,Lambda]-2Lambda", anchor_sl2, [=](const FormPoint& a, Side sd, const JetFrame& j) {
            return comm(hh, la)(a, sd, j) - la(a, sd, j).scale(2.0);
        });
    }
    for (auto [x, xn] : {std::pair{T::L_A, "L_A"}, std::pair{T::Lambda_A, "Lambda_A"}})
        for (auto [y, yn] : {std::pair{T::L_B, "L_B"}, std::pair{T::Lambda_B, "Lambda_B"}})
            measure(std::string("[") + xn + "," + yn + "]", "the two sl(2) actions commute", comm(A(x), A(y)));
    for (auto [a_op, b_op, nm] : {std::tuple{T::H_A, T::H_B, "H"}, std::tuple{T::L_A, T::L_B, "L"},
                                  std::tuple{T::Lambda_A, T::Lambda_B, "Lambda"}}) {
        const std::string name = std::string("T:") + nm + "_A T - T " + nm + "_B";
        s.check(name, "carries the hard Lefschetz", 1e-10, [&] {
            double r = 0.0;
            for (const JetFrame& j : jets)
                for (unsigned m = 0; m < dim; ++m) {
                    const FormPoint a = FormPoint::basis(2 * n, m);
                    r = std::max(r, sup_norm(apply(a_op, transform(a, j), Side::W, j) -
                                             transform(apply(b_op, a, Side::M, j), j)));
                }
            return std::pair{r, long(jets.size()) * long(dim)};
        });
    }
}

// ------------------------------------------------ yukawa

void suite_yukawa(SuiteRun& s) {
    const int n = s.n();
    MirrorContext ctx(s.phi, s.cfg.covolume);
    s.check("ratio_constancy", "The Yukawa coupling in the A side", 1e-8, [&] {
        const Quadrature quad = s.quadrature(6);
        std::vector<cplx> ratios;
        for (int k = 0; k < 10; ++k) {
            std::vector<TnForm> forms;
            std::vector<BeltramiField> images;
            for (int m = 0; m < n; ++m) {
                forms.push_back(moduli_form({s.random_field(3)}, n));
                images.push_back(deformation_image(forms.back(), ctx));
            }
            ratios.push_back(yukawa_A(forms, ctx, quad).value / yukawa_B(images, ctx, quad).value);
        }
        return std::pair{rel_stdev(ratios), 10L};
    });
}

// ------------------------------------------------ moduli

void suite_moduli(SuiteRun& s) {
    const int n = s.n();
    MirrorContext ctx(s.phi, s.cfg.covolume);
    s.check("isometry", "a holomorphic isometry", 1e-6, [&] {
        const Quadrature quad = s.quadrature(8);
        double r = 0.0;
        for (int k = 0; k < 10; ++k) r = std::max(r, moduli_isometry_residual({s.random_field(3)}, {s.random_field(3)}, ctx, quad));
        return std::pair{r, 10L};
    });
    s.check("moduli_map_formula", "obtained explicitly the homomorphism", 1e-12, [&] {
        const ModuliVector xi{s.random_field(3)};
        const auto pts = s.points(100);
        double r = 0.0;
        for (const Vec& x : pts) {
            const JetFrame j = jet(*s.phi, x);
            const CMat oracle = (-(xi.xi->hessian(x) * j.inverse_hessian)).cast<cplx>();
            r = std::max(r, max_abs(moduli_map(xi, j) - oracle));
        }
        return std::pair{r, long(pts.size())};
    });
    const auto pts = s.points(10);
    s.check("fiber_l2_metric", "equals the L2 metric on the moduli space", 1e-8, [&] {
        double r = 0.0;
        for (const Vec& x : pts) {
            const JetFrame j = jet(*s.phi, x);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) r = std::max(r, fiber_l2_metric_residual(ctx, j, a, b, s.cfg.fiber_resolution));
        }
        return std::pair{r, long(pts.size()) * n * n};
    });
    s.check("fiber_l2_mixed_block", "equals the L2 metric on the moduli space", kExact, [&] {
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, max_abs(fiber_l2_metric(ctx, jet(*s.phi, x), s.cfg.fiber_resolution).mixed));
        return std::pair{r, long(pts.size())};
    });
}

// ------------------------------------------------ connections

void suite_connections(SuiteRun& s) {
    const auto pts = s.points(10);
    const auto psi = legendre_dual(s.phi);
    if (!s.is_grid())
        s.check("a_curvature", "One can check directly that it has zero curvature", 1e-8, [&] {
            double r = 0.0;
            for (const Vec& x : pts) r = std::max(r, a_curvature_residual(*s.phi, x));
            return std::pair{r, long(pts.size())};
        });
    s.check("nabla_omega", "Then its A-connection", 1e-12, [&] {
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, nabla_omega_residual(jet(*s.phi, x)));
        return std::pair{r, long(pts.size())};
    });
    s.check("duality", "take the A-connection (resp. B-connection)", 1e-9, [&] {
        double r = 0.0;
        for (const Vec& x : pts) {
            const JetFrame j = jet(*s.phi, x);
            r = std::max(r, connection_duality_residual(j, jet(*psi, j.gradient)));
        }
        return std::pair{r, long(pts.size())};
    });
    s.check("levi_civita_midpoint", "The A-connection is", 1e-10, [&] {
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, levi_civita_midpoint_residual(jet(*s.phi, x)));
        return std::pair{r, long(pts.size())};
    });
}

// ------------------------------------------------ cycles

void suite_cycles(SuiteRun& s) {
    const int n = s.n();
    s.check("slag_dhym_agreement", "we obtain a U(1) connection", 1e-9, [&] {
        std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi);
        double r = 0.0;
        for (int t = 0; t < 50; ++t) {
            const SLagSection sec{s.random_field(3), nullptr, th(s.rng)};
            const UOneConnection u = fourier_transform_cycle(sec, s.phi);
            const Vec x = s.points(1)[0];
            r = std::max(r, std::abs(dhym_residual(u, sec.theta, *s.phi, {x}) - slag_phase_residual(sec, jet(*s.phi, x))));
        }
        return std::pair{r, 50L};
    });
    s.check("curvature_02", "we obtain a U(1) connection", 1e-15, [&] {
        const SLagSection sec{s.random_field(3), s.random_field(3), 0.0};
        const UOneConnection u = fourier_transform_cycle(sec, s.phi);
        const auto pts = s.points(20);
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, sup_norm(curvature_02(u.at(x))));
        return std::pair{r, long(pts.size())};
    });
    s.check("correlation", "The correlation functions on these moduli", 1e-6, [&] {
        MirrorContext ctx(s.phi, s.cfg.covolume);
        const cplx kappa = correlation_calibration(n, s.cfg.covolume);
        const Quadrature quad = s.quadrature(4);
        double r = 0.0;
        for (int t = 0; t < 5; ++t) {
            std::vector<CycleTangentForm> alphas;
            for (int m = 0; m < n; ++m) {
                CycleTangentForm a(n, 1);
                for (int i = 0; i < n; ++i) a.add(1u << i, Coefficient(Polynomial::random(n, 2, s.rng, 1.0, false)));
                alphas.push_back(a);
            }
            r = std::max(r, correlation_residual(alphas, ctx, quad, kappa));
        }
        return std::pair{r, 5L};
    });
}

// ------------------------------------------------ hyperkahler

void suite_hyperkahler(SuiteRun& s) {
    const int n = s.n();
    const auto pts = s.points(20);
    std::vector<HKFrame> frames;
    for (const Vec& x : pts) frames.push_back(build_hk(jet(*s.phi, x)));
    s.check("quaternion", "I^2=J^2=K^2=IJK=-id", 1e-12, [&] {
        double r = 0.0;
        for (const HKFrame& f : frames) r = std::max(r, quaternion_residuals(f).max());
        return std::pair{r, long(frames.size())};
    });
    s.check("kahler_family", "the induced metric on M is given", 1e-12, [&] {
        std::normal_distribution<double> g;
        double r = 0.0;
        for (const HKFrame& f : frames) {
            const SphereParam t = SphereParam::normalized(g(s.rng), g(s.rng), g(s.rng));
            const KahlerFamilyResult k = kahler_family_check(f, t);
            r = std::max(r, k.min_singular > 0 ? k.square : 1.0);
        }
        return std::pair{r, long(frames.size())};
    });
    if (n <= 2)
        s.check("lj_lambdak_eigenform", "embeds naturally inside the hyperkahler", 1e-10, [&] {
            double r = 0.0;
            for (const HKFrame& f : frames) r = std::max(r, lj_lambdak_eigen_residual(f));
            return std::pair{r, long(frames.size())};
        });
    for (auto [which, nm] : {std::pair{0, "d_omega_I"}, std::pair{2, "d_omega_K"}})
        s.check(nm, "the induced metric on M is given", 1e-8, [&, which = which] {
            double r = 0.0;
            for (int k = 0; k < 5; ++k) r = std::max(r, d_omega_residual(*s.phi, pts[k], which));
            return std::pair{r, 5L};
        });
}

// ------------------------------------------------ automorphisms

BaseMap bump_map(const Domain& d, double eps) {
    std::vector<Polynomial> comps;
    for (int k = 0; k < d.n; ++k) {
        const Polynomial xk = Polynomial::variable(d.n, k);
        Polynomial p = xk + xk * xk * cplx(eps);
        if (d.n > 1) p += xk * Polynomial::variable(d.n, (k + 1) % d.n) * cplx(0.5 * eps);
        comps.push_back(p);
    }
    return BaseMap::polynomial(comps, d);
}

void suite_automorphisms(SuiteRun& s) {
    const int n = s.n();
    const Domain flat_dom = Domain::box(n, -1.0, 1.0);
    const auto flat = QuadraticPotential::flat(flat_dom);
    Mat A = Mat::Identity(n, n);
    for (int a = 0; a + 1 < n; ++a) A(a, a + 1) = 0.25;
    const BaseMap lin = BaseMap::affine(A, Vec::Constant(n, 0.02), flat_dom);
    const Vec y = Vec::LinSpaced(n, 0.6, -0.9);
    const auto flat_pts = random_points(Domain::box(n, -0.4, 0.4), s.rng, 5);

    // the non-affine map lives near the center of the background domain
    const Domain& d = s.phi->domain();
    Domain inner = d;
    for (auto& [lo, hi] : inner.bounds) {
        const double m = 0.5 * (lo + hi), r = 0.2 * (hi - lo);
        lo = m - r;
        hi = m + r;
    }
    const BaseMap bump = bump_map(d, 0.05);
    const auto pts = random_points(inner, s.rng, 4);
    // Differencing an interpolated background only matches its derivative
    // fields to second order in the grid spacing.
    const double h = d.spacing(0);
    const auto fd_tol = [&](double tol) { return s.is_grid() ? std::max(tol, 5.0 * h * h) : tol; };

    s.check("dbar_affine_exact", "We write f_B = df", kExact, [&] {
        double r = 0.0;
        for (const Vec& x : flat_pts) r = std::max(r, max_abs(dbar_b_residual(lin, x, y, 0.5)));
        return std::pair{r, long(flat_pts.size())};
    });
    s.check("dbar_fd_agreement", "We write f_B = df", 1e-7, [&] {
        double r = 0.0;
        for (const Vec& x : pts) r = std::max(r, max_abs(dbar_b_fd(bump, x, y, 0.5) - dbar_b_residual(bump, x, y, 0.5)));
        return std::pair{r, long(pts.size())};
    });
    s.check("varpi_affine_exact", "whose antisymmetric part is", kExact, [&] {
        double r = 0.0;
        for (const Vec& p : flat_pts) r = std::max(r, max_abs(varpi_residual(lin, flat, p, y)));
        return std::pair{r, long(flat_pts.size())};
    });
    s.check("varpi_fd_agreement", "whose antisymmetric part is", fd_tol(1e-7), [&] {
        const BaseMap bhat = conjugate(bump, s.phi);
        double r = 0.0;
        for (const Vec& x : pts) {
            const Vec p = s.phi->gradient(x);
            const Vec Y = bhat.jet(p).jac.transpose().lu().solve(y);
            r = std::max(r, max_abs(varpi_pullback_fd(bump, s.phi, p, y) + varpi_residual(bump, s.phi, p, Y)));
        }
        return std::pair{r, long(pts.size())};
    });
    s.check("symplectic_a", "Pulling back one forms defines a symplectic", fd_tol(1e-8), [&] {
        const InducedMap F = induce_a(bump, s.phi);
        double r = 0.0;
        for (const Vec& x : pts) {
            Vec py(2 * n);
            py << s.phi->gradient(x), y;
            r = std::max(r, symplectic_pullback_residual(F, py));
        }
        return std::pair{r, long(pts.size())};
    });
    s.check("double_mirror_flip", "carries the hard Lefschetz", 1e-10, [&] {
        const InducedMap F = induce_b(bump, s.phi);
        Vec probe(2 * n);
        probe << pts[0], y;
        const InducedMap FF = mirror_flip(mirror_flip(F, probe), probe);
        double r = 0.0;
        for (const Vec& x : pts) {
            Vec xy(2 * n);
            xy << x, y;
            r = std::max(r, max_abs(FF(xy) - F(xy)));
        }
        return std::pair{r, long(pts.size())};
    });
    s.check("linear_isometry", "preserves the corresponding metrics", 1e-8, [&] {
        Mat R = Mat::Identity(n, n);
        if (n == 1) {
            R(0, 0) = -1.0;
        } else {
            R(0, 0) = R(1, 1) = 0.0;
            R(0, 1) = -1.0;
            R(1, 0) = 1.0;
        }
        const BaseMap rot = BaseMap::affine(R, Vec::Zero(n), flat_dom);
        const InducedMap fb = induce_b(rot, flat), fa = induce_a(rot, flat);
        double r = 0.0;
        for (const Vec& x : flat_pts) {
            Vec xy(2 * n);
            xy << x, y;
            r = std::max({r, metric_pullback_residual(fb, xy), metric_pullback_residual(fa, xy),
                          max_abs(induce_a_in_base_chart(fa, xy) - fb(xy))});
        }
        return std::pair{r, long(flat_pts.size())};
    });
}

// ------------------------------------------------ bfield

void suite_bfield(SuiteRun& s) {
    const int n = s.n();
    s.check("complexified_solver", "complexified real Monge-Ampere equation", 1e-8, [&] {
        Domain d = s.phi->domain();
        const ComplexSolveResult r = solve_complexified_ma(d, std::polar(1.0, 0.05), [](const Vec&) { return 0.0; });
        return std::pair{r.final_residual, long(r.residual_history.size())};
    });
    s.check("gross_invariance", "as if beta has no effect", 1e-12, [&] {
        const ComplexifiedPotential cp{s.phi, std::make_shared<PolynomialField>(Polynomial::random(n, 3, s.rng, 0.3, false)), 1.0};
        const auto pts = s.points(20);
        return std::pair{gross_bfield_checks(cp, pts).omega_invariance, long(pts.size())};
    });
}

using SuiteFn = void (*)(SuiteRun&);

SuiteFn suite_fn(const std::string& name) {
    static const std::map<std::string, SuiteFn> table = {
        {"legendre", suite_legendre},       {"ma", suite_ma},
        {"mirror-forms", suite_mirror_forms}, {"sl2", suite_sl2},
        {"yukawa", suite_yukawa},           {"moduli", suite_moduli},
        {"connections", suite_connections}, {"cycles", suite_cycles},
        {"hyperkahler", suite_hyperkahler}, {"automorphisms", suite_automorphisms},
        {"bfield", suite_bfield}};
    return table.at(name);
}

bool is_solver_failure(const std::exception& e) {
    return dynamic_cast<const LostConvexity*>(&e) || dynamic_cast<const MaxIterations*>(&e) ||
           dynamic_cast<const HomotopyStall*>(&e) || dynamic_cast<const NewtonDivergence*>(&e);
}

}  // namespace

Report run(const SuiteConfig& config) {
    config.validate();
    const PotentialPtr phi = build_potential(config);
    Report rep;
    const MirrorCalibration cal = calibrate_mirror(config.n, config.covolume);
    rep.calibration = cal.to_json();
    const cplx kappa = correlation_calibration(config.n, config.covolume);
    rep.calibration["correlation_ratio"] = {kappa.real(), kappa.imag()};
    for (const std::string& name : config.suites) {
        SuiteRun s(config, name, phi);
        try {
            suite_fn(name)(s);
        } catch (const std::exception& e) {
            if (is_solver_failure(e)) rep.solver_failures.push_back(name);
            s.records.push_back({name, "exception", e.what(), DBL_MAX, 0.0, false, 0, 0.0});
        }
        rep.records.insert(rep.records.end(), s.records.begin(), s.records.end());
    }
    rep.sort();
    return rep;
}

// ---------------------------------------------------------------- emission

bool Report::all_pass() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

void Report::sort() {
    std::stable_sort(records.begin(), records.end(), [](const CheckRecord& a, const CheckRecord& b) {
        return std::tie(a.suite, a.check) < std::tie(b.suite, b.check);
    });
}

json Report::to_json() const {
    json recs = json::array();
    for (const CheckRecord& r : records)
        recs.push_back({{"suite", r.suite},
                        {"check", r.check},
                        {"anchor", r.anchor},
                        {"max_residual", r.max_residual},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass},
                        {"samples", r.samples},
                        {"wall_time_ms", r.wall_time_ms}});
    json j;
    j["calibration"] = calibration;
    j["records"] = recs;
    if (!solver_failures.empty()) j["solver_failures"] = solver_failures;
    return j;
}

Report Report::from_json(const json& j) {
    Report r;
    try {
        r.calibration = j.value("calibration", json::object());
        for (const json& x : j.at("records")) {
            CheckRecord c;
            c.suite = x.at("suite").get<std::string>();
            c.check = x.at("check").get<std::string>();
            c.anchor = x.at("anchor").get<std::string>();
            c.max_residual = x.at("max_residual").is_null() ? NAN : x.at("max_residual").get<double>();
            c.tolerance = x.at("tolerance").get<double>();
            c.pass = x.at("pass").get<bool>();
            c.samples = x.at("samples").get<long>();
            c.wall_time_ms = x.at("wall_time_ms").get<double>();
            r.records.push_back(c);
        }
        if (j.contains("solver_failures")) r.solver_failures = j.at("solver_failures").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed report: ") + e.what());
    }
    return r;
}

ReportFormat format_from_path(const std::string& path) {
    return std::filesystem::path(path).extension() == ".csv" ? ReportFormat::Csv : ReportFormat::Json;
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string render(const Report& r, ReportFormat f) {
    if (f == ReportFormat::Json) return r.to_json().dump(2) + "\n";
    std::ostringstream o;
    o << "suite,check,anchor,max_residual,tolerance,pass,samples,wall_time_ms\n";
    for (const CheckRecord& c : r.records)
        o << csv_field(c.suite) << ',' << csv_field(c.check) << ',' << csv_field(c.anchor) << ',' << g17(c.max_residual)
          << ',' << g17(c.tolerance) << ',' << (c.pass ? "true" : "false") << ',' << c.samples << ','
          << g17(c.wall_time_ms) << '\n';
    return o.str();
}

void emit(const Report& r, ReportFormat f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << render(r, f);
    if (!out) throw IoError("write failed for " + path);
}

Report load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path);
    try {
        json j;
        in >> j;
        return Report::from_json(j);
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

int exit_code(const Report& r) {
    if (!r.solver_failures.empty()) return 3;
    return r.all_pass() ? 0 : 1;
}

}  // namespace msym
