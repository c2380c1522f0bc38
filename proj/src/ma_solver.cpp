#include "msym/ma_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "msym/errors.hpp"
#include "msym/kernels.hpp"

namespace msym {

using kernels::Linearization;
using kernels::Stencil;

void SolverOptions::validate() const {
    if (!(tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("damping factor must lie in (0,1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidArgument("Armijo constant must lie in (0,1)");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
}

nlohmann::json SolveResult::history_json() const {
    return {{"residual_history", residual_history},
            {"det_history", det_history},
            {"step_lengths", step_lengths},
            {"converged", converged},
            {"iterations", iterations},
            {"direct_fallbacks", direct_fallbacks}};
}

namespace {

template <class S>
double sup_abs(const std::vector<S>& v) {
    double m = 0.0;
    for (const S& x : v) m = std::max(m, kernels::magnitude(x));
    return m;
}

double sup(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

template <class S>
S dot(const std::vector<S>& a, const std::vector<S>& b);

template <>
double dot<double>(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <>
cplx dot<cplx>(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

template <class S>
double norm(const std::vector<S>& a) {
    return std::sqrt(std::abs(dot(a, a)));
}

// Jacobi-preconditioned BiCGSTAB for the linearized operator on interior
// unknowns. Returns false when the iteration breaks down or stalls.
template <class S>
bool bicgstab(const Stencil& st, const Linearization<S>& L, bool par, const std::vector<S>& b, std::vector<S>& x,
              double tol, int max_iter) {
    const std::size_t m = b.size();
    std::vector<S> full(st.nodes, S(0));
    auto apply = [&](const std::vector<S>& in, std::vector<S>& out) {
        for (std::size_t i = 0; i < m; ++i) full[st.interior[i]] = in[i];
        kernels::jacobian_apply(par, st, L, full, out);
    };
    std::vector<S> dinv(m);
    for (std::size_t i = 0; i < m; ++i) dinv[i] = S(1) / kernels::jacobian_diagonal(st, L, i);

    x.assign(m, S(0));
    std::vector<S> r = b, rhat = b, p(m, S(0)), v(m, S(0)), s(m), t(m), ph(m), sh(m);
    const double bnorm = norm(b);
    if (bnorm == 0.0) return true;
    S rho(1), alpha(1), omega(1);
    for (int it = 0; it < max_iter; ++it) {
        const S rho_new = dot(rhat, r);
        if (kernels::magnitude(rho_new) < 1e-300) return false;
        const S beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < m; ++i) {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            ph[i] = dinv[i] * p[i];
        }
        apply(ph, v);
        const S rv = dot(rhat, v);
        if (kernels::magnitude(rv) < 1e-300) return false;
        alpha = rho / rv;
        for (std::size_t i = 0; i < m; ++i) s[i] = r[i] - alpha * v[i];
        if (norm(s) <= tol * bnorm) {
            for (std::size_t i = 0; i < m; ++i) x[i] += alpha * ph[i];
            return true;
        }
        for (std::size_t i = 0; i < m; ++i) sh[i] = dinv[i] * s[i];
        apply(sh, t);
        const S tt = dot(t, t);
        if (kernels::magnitude(tt) < 1e-300) return false;
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < m; ++i) {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        if (norm(r) <= tol * bnorm) return true;
        if (kernels::magnitude(omega) < 1e-300) return false;
    }
    return false;
}

// Assembles the same operator as a sparse matrix and factors it directly.
template <class S>
void sparse_lu_solve(const Stencil& st, const Linearization<S>& L, const std::vector<S>& b, std::vector<S>& x) {
    const int n = st.n;
    std::vector<Eigen::Triplet<S>> trip;
    auto add = [&](std::size_t row, std::size_t node, S w) {
        const long c = st.compact[node];
        if (c >= 0) trip.emplace_back(static_cast<int>(row), static_cast<int>(c), w);
    };
    for (std::size_t i = 0; i < st.interior.size(); ++i) {
        const std::size_t k = st.interior[i];
        const S* hi = &L.hinv[i * n * n];
        for (int a = 0; a < n; ++a) {
            const std::ptrdiff_t sa = st.stride[a];
            const S w = hi[a * n + a] / (st.h[a] * st.h[a]);
            add(i, k + sa, w);
            add(i, k - sa, w);
            add(i, k, -2.0 * w);
            for (int c = a + 1; c < n; ++c) {
                const std::ptrdiff_t sc = st.stride[c];
                const S wc = (hi[a * n + c] + hi[c * n + a]) / (4.0 * st.h[a] * st.h[c]);
                add(i, k + sa + sc, wc);
                add(i, k - sa - sc, wc);
                add(i, k + sa - sc, -wc);
                add(i, k - sa + sc, -wc);
            }
        }
    }
    const int m = static_cast<int>(st.interior.size());
    Eigen::SparseMatrix<S> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<S>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SingularJacobian("linearized Monge-Ampere operator is singular");
    Eigen::Matrix<S, Eigen::Dynamic, 1> rhs(m);
    for (int i = 0; i < m; ++i) rhs(i) = b[i];
    const Eigen::Matrix<S, Eigen::Dynamic, 1> sol = lu.solve(rhs);
    x.resize(m);
    for (int i = 0; i < m; ++i) x[i] = sol(i);
}

template <class S>
struct NewtonTrace {
    std::vector<double> F_sup, det_sup, steps;
    int fallbacks = 0;
};

// Runs damped Newton on log(det D^2 u / C) = 0 until sup |det - C| <= tol.
// Returns the number of Newton steps taken.
template <class S>
int newton(const Stencil& st, std::vector<S>& u, S C, const SolverOptions& o, NewtonTrace<S>& tr) {
    Linearization<S> L, trial;
    kernels::linearize(o.parallel, st, u, C, L);
    if (!L.convex) throw LostConvexity("starting iterate has an indefinite discrete Hessian");
    double fs = sup_abs(L.F);
    tr.F_sup.push_back(fs);
    tr.det_sup.push_back(sup(L.det_err));
    const std::size_t m = st.interior.size();
    std::vector<S> rhs(m), delta, cand(u);
    for (int it = 0; it < o.max_iterations; ++it) {
        if (tr.det_sup.back() <= o.tolerance) return it;
        for (std::size_t i = 0; i < m; ++i) rhs[i] = -L.F[i];
        if (!bicgstab(st, L, o.parallel, rhs, delta, o.linear_tolerance, o.linear_max_iterations)) {
            sparse_lu_solve(st, L, rhs, delta);
            ++tr.fallbacks;
        }
        double t = 1.0;
        bool accepted = false, saw_convex = false;
        for (int ls = 0; ls <= o.max_halvings; ++ls) {
            cand = u;
            for (std::size_t i = 0; i < m; ++i) cand[st.interior[i]] += t * delta[i];
            kernels::linearize(o.parallel, st, cand, C, trial);
            if (trial.convex) {
                saw_convex = true;
                const double ft = sup_abs(trial.F);
                if (ft <= (1.0 - o.armijo * t) * fs) {
                    accepted = true;
                    fs = ft;
                    break;
                }
            }
            t *= o.backtrack;
        }
        if (!accepted) {
            if (!saw_convex) throw LostConvexity("no damped step kept the discrete Hessian positive definite");
            throw NewtonDivergence("line search found no sufficient decrease");
        }
        u.swap(cand);
        std::swap(L, trial);
        tr.F_sup.push_back(fs);
        tr.det_sup.push_back(sup(L.det_err));
        tr.steps.push_back(t);
    }
    if (tr.det_sup.back() <= o.tolerance) return o.max_iterations;
    throw MaxIterations("Newton iteration did not reach the residual tolerance");
}

std::shared_ptr<GridPotential> make_grid(const Domain& d, std::vector<double> v, double C) {
    return std::make_shared<GridPotential>(GridData{d, std::move(v)}, C);
}

}  // namespace

std::vector<double> initial_guess(const Domain& d, double C, const BoundaryData& g) {
    const int n = d.n;
    const Vec c = d.center();
    const int nq = n * (n + 1) / 2;
    const int np = nq + n + 1;
    std::vector<std::size_t> bnodes;
    for (std::size_t k = 0; k < d.node_count(); ++k)
        if (d.on_boundary(k, 1)) bnodes.push_back(k);
    Mat X(bnodes.size(), np);
    Vec y(bnodes.size());
    for (std::size_t r = 0; r < bnodes.size(); ++r) {
        const Vec z = d.node(bnodes[r]) - c;
        int col = 0;
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) X(r, col++) = (a == b ? 0.5 : 1.0) * z(a) * z(b);
        for (int a = 0; a < n; ++a) X(r, col++) = z(a);
        X(r, col) = 1.0;
        y(r) = g(d.node(bnodes[r]));
    }
    const Vec coef = X.colPivHouseholderQr().solve(y);
    Mat A(n, n);
    int col = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) A(a, b) = A(b, a) = coef(col++);
    const Vec lin = coef.segment(nq, n);
    const double c0 = coef(np - 1);

    // Hessian of the bump prod (1 - s_a^2)^(1/n) at the center is -D.
    Vec Dd(n);
    for (int a = 0; a < n; ++a) Dd(a) = 8.0 / (n * d.length(a) * d.length(a));
    const Vec Dm12 = Dd.cwiseSqrt().cwiseInverse();
    const Mat B = Dm12.asDiagonal() * A * Dm12.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.transpose()));
    const Vec mu = es.eigenvalues();
    const double target = C / Dd.prod();
    auto prod_at = [&](double k) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) p *= mu(i) + k;
        return p;
    };
    double kappa = 0.0;
    if (!(mu.minCoeff() > 0.0 && prod_at(0.0) >= target)) {
        double lo = std::max(0.0, -mu.minCoeff()), hi = lo + 1.0;
        while (prod_at(hi) < target) hi = 2.0 * hi + 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (prod_at(mid) < target ? lo : hi) = mid;
        }
        kappa = hi;
    }

    std::vector<double> u(d.node_count());
    const Stencil st(d);
    std::vector<double> lam;
    for (int attempt = 0; attempt < 30; ++attempt) {
        for (std::size_t k = 0; k < u.size(); ++k) {
            const Vec x = d.node(k);
            if (d.on_boundary(k, 1)) {
                u[k] = g(x);
                continue;
            }
            const Vec z = x - c;
            double bump = 1.0;
            for (int a = 0; a < n; ++a) {
                const double s = 2.0 * z(a) / d.length(a);
                bump *= std::pow(std::max(0.0, 1.0 - s * s), 1.0 / n);
            }
            u[k] = 0.5 * z.dot(A * z) + lin.dot(z) + c0 - kappa * bump;
        }
        kernels::serial::min_eigen_field(st, u, lam);
        if (std::all_of(lam.begin(), lam.end(), [](double v) { return v > 0.0; })) break;
        kappa = 2.0 * kappa + 1e-2;  // boundary data far from quadratic: add convexity
    }
    return u;
}

SolveResult solve_real_ma(const Domain& d, double C, const BoundaryData& g, const SolverOptions& opts) {
    d.validate();
    opts.validate();
    if (!(C > 0.0)) throw InvalidArgument("Monge-Ampere constant must be positive");
    if (d.grid_resolution < 5) throw InvalidArgument("grid resolution too small for the solver");
    const Stencil st(d);
    std::vector<double> u;
    if (opts.initial.empty()) {
        u = initial_guess(d, C, g);
    } else {
        if (opts.initial.size() != d.node_count()) throw InvalidArgument("initial guess size does not match grid");
        u = opts.initial;
        for (std::size_t k = 0; k < u.size(); ++k)
            if (d.on_boundary(k, 1)) u[k] = g(d.node(k));
    }
    NewtonTrace<double> tr;
    SolveResult res;
    res.iterations = newton(st, u, C, opts, tr);
    res.converged = true;
    res.residual_history = std::move(tr.F_sup);
    res.det_history = std::move(tr.det_sup);
    res.step_lengths = std::move(tr.steps);
    res.direct_fallbacks = tr.fallbacks;
    res.potential = make_grid(d, std::move(u), C);
    res.min_eigenvalue = convexity_spectrum(*res.potential);
    return res;
}

ComplexSolveResult solve_complexified_ma(const Domain& d, cplx C, const BoundaryData& g, int homotopy_steps,
                                         const SolverOptions& opts) {
    if (std::abs(C) == 0.0) throw InvalidArgument("complex Monge-Ampere constant must be nonzero");
    if (homotopy_steps < 1) throw InvalidArgument("at least one homotopy step is required");
    ComplexSolveResult out;
    const SolveResult base = solve_real_ma(d, std::abs(C), g, opts);
    if (C.imag() == 0.0 && C.real() > 0.0) {
        out.phi = base.potential;
        out.eta = make_grid(d, std::vector<double>(d.node_count(), 0.0), 0.0);
        out.potential = {out.phi, out.eta, C};
        out.step_iterations = {base.iterations};
        out.residual_history = base.det_history;
        out.final_residual = base.det_history.back();
        out.converged = true;
        return out;
    }
    const Stencil st(d);
    std::vector<cplx> u(d.node_count());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = base.potential->nodal_values()[k];
    const double arg = std::arg(C), mod = std::abs(C);
    for (int s = 1; s <= homotopy_steps; ++s) {
        const cplx Cs = std::polar(mod, arg * s / homotopy_steps);
        NewtonTrace<cplx> tr;
        try {
            out.step_iterations.push_back(newton(st, u, Cs, opts, tr));
        } catch (const MaxIterations&) {
            throw HomotopyStall("homotopy step " + std::to_string(s) + " did not converge");
        } catch (const NewtonDivergence&) {
            throw HomotopyStall("homotopy step " + std::to_string(s) + " found no descent step");
        }
        out.residual_history.insert(out.residual_history.end(), tr.det_sup.begin(), tr.det_sup.end());
        out.final_residual = tr.det_sup.back();
    }
    std::vector<double> re(u.size()), im(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        re[k] = u[k].real();
        im[k] = u[k].imag();
    }
    out.phi = make_grid(d, std::move(re), mod);
    out.eta = make_grid(d, std::move(im), 0.0);
    out.potential = {out.phi, out.eta, C};
    out.converged = true;
    return out;
}

std::vector<double> convexity_spectrum(const GridPotential& phi) {
    const std::size_t M = phi.domain().node_count();
    std::vector<double> out(M);
    for (std::size_t k = 0; k < M; ++k) out[k] = min_eigenvalue(phi.nodal_hessian(k));
    return out;
}

double grid_ma_residual(const GridPotential& phi, double C) {
    const Domain& d = phi.domain();
    double r = 0.0;
    for (std::size_t k = 0; k < d.node_count(); ++k)
        if (!d.on_boundary(k, 1)) r = std::max(r, std::abs(phi.nodal_hessian(k).determinant() - C));
    return r;
}

}  // namespace msym
