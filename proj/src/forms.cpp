#include "msym/forms.hpp"

#include <cmath>

#include "msym/errors.hpp"

namespace msym {

std::string to_string(Side s) { return s == Side::M ? "M" : "W"; }

Side side_from_string(const std::string& s) {
    if (s == "M") return Side::M;
    if (s == "W") return Side::W;
    throw InvalidArgument("unknown side '" + s + "'");
}

std::string to_string(OperatorTag t) {
    switch (t) {
        case OperatorTag::L_A: return "L_A";
        case OperatorTag::Lambda_A: return "Lambda_A";
        case OperatorTag::H_A: return "H_A";
        case OperatorTag::L_B: return "L_B";
        case OperatorTag::Lambda_B: return "Lambda_B";
        case OperatorTag::H_B: return "H_B";
    }
    return "?";
}

FormPoint values(const FormJet& a) {
    FormPoint r(a.gens);
    for (std::size_t m = 0; m < a.size(); ++m) r.c[m] = a.c[m].v;
    return r;
}

FormPoint partial(const FormJet& a, int k) {
    FormPoint r(a.gens);
    for (std::size_t m = 0; m < a.size(); ++m) r.c[m] = a.c[m].g[k];
    return r;
}

FormPoint bidegree_part(const FormPoint& a, int p, int q) {
    const int n = form_n(a);
    FormPoint r(a.gens);
    for (unsigned m = 0; m < a.size(); ++m)
        if (popcount(dz_part(n, m)) == p && popcount(dzbar_part(n, m)) == q) r.c[m] = a.c[m];
    return r;
}

// ---------------------------------------------------------------- coefficients

Coefficient operator+(const Coefficient& a, const Coefficient& b) {
    if (a.is_polynomial() && b.is_polynomial()) return Coefficient(a.polynomial() + b.polynomial());
    return Coefficient(Coefficient::Fn([a, b](const Vec& x) { return a(x) + b(x); }));
}

Coefficient operator*(const Coefficient& a, const Coefficient& b) {
    if (a.is_polynomial() && b.is_polynomial()) return Coefficient(a.polynomial() * b.polynomial());
    return Coefficient(Coefficient::Fn([a, b](const Vec& x) { return a(x) * b(x); }));
}

Coefficient operator*(cplx s, const Coefficient& a) {
    if (a.is_polynomial()) return Coefficient(s * a.polynomial());
    return Coefficient(Coefficient::Fn([s, a](const Vec& x) { return s * a(x); }));
}

// ---------------------------------------------------------------- TnForm

TnForm::TnForm(int n, int p, int q, Side side) : n_(n), p_(p), q_(q), side_(side) {
    if (n < 1 || n > kMaxDim) throw InvalidArgument("form dimension must be in 1..4");
    if (p < 0 || q < 0 || p > n || q > n) throw DegreeOverflow("bidegree out of range");
}

TnForm TnForm::monomial(int n, Side side, unsigned I, unsigned J, const Coefficient& c) {
    TnForm f(n, popcount(I), popcount(J), side);
    f.add(I, J, c);
    return f;
}

TnForm TnForm::basis(int n, Side side, unsigned I, unsigned J, cplx c) {
    return monomial(n, side, I, J, Coefficient::constant(n, c));
}

void TnForm::add(unsigned I, unsigned J, const Coefficient& c) {
    if (popcount(I) != p_ || popcount(J) != q_) throw InvalidArgument("term does not match the form's bidegree");
    if ((I | J) >> n_) throw InvalidArgument("index outside 1..n");
    const unsigned m = form_mask(n_, I, J);
    auto it = terms_.find(m);
    if (it == terms_.end())
        terms_.emplace(m, c);
    else
        it->second = it->second + c;
}

bool TnForm::is_polynomial() const {
    for (const auto& [m, c] : terms_)
        if (!c.is_polynomial()) return false;
    return true;
}

FormJet TnForm::at(const Vec& x) const {
    FormJet r(2 * n_);
    for (const auto& [m, c] : terms_) r.c[m] = c(x);
    return r;
}

namespace {

nlohmann::json index_list(unsigned mask) {
    nlohmann::json a = nlohmann::json::array();
    for (unsigned b = mask; b; b &= b - 1) a.push_back(__builtin_ctz(b) + 1);
    return a;
}

unsigned index_mask(const nlohmann::json& a, int n) {
    unsigned m = 0;
    int last = 0;
    for (const auto& v : a) {
        const int i = v.get<int>();
        if (i < 1 || i > n) throw InvalidArgument("multi-index entry out of range");
        if (i <= last) throw InvalidArgument("multi-index must be strictly increasing");
        last = i;
        m |= 1u << (i - 1);
    }
    return m;
}

}  // namespace

nlohmann::json TnForm::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [m, c] : terms_) {
        if (!c.is_polynomial()) throw InvalidArgument("only polynomial coefficients serialize");
        entries.push_back({{"I", index_list(dz_part(n_, m))},
                           {"J", index_list(dzbar_part(n_, m))},
                           {"coeff", c.polynomial().to_json()}});
    }
    return {{"n", n_}, {"p", p_}, {"q", q_}, {"side", to_string(side_)}, {"entries", entries}};
}

TnForm TnForm::from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    TnForm f(n, j.at("p").get<int>(), j.at("q").get<int>(), side_from_string(j.at("side").get<std::string>()));
    for (const auto& e : j.at("entries"))
        f.add(index_mask(e.at("I"), n), index_mask(e.at("J"), n), Coefficient(Polynomial::from_json(e.at("coeff"))));
    return f;
}

// ---------------------------------------------------------------- symbolic algebra

TnForm wedge(const TnForm& a, const TnForm& b) {
    if (a.n() != b.n() || a.side() != b.side()) throw InvalidArgument("wedge of forms on different spaces");
    const int n = a.n();
    if (a.p() + b.p() > n || a.q() + b.q() > n) throw DegreeOverflow("wedge exceeds bidegree (n,n)");
    TnForm r(n, a.p() + b.p(), a.q() + b.q(), a.side());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            if (ma & mb) continue;
            const double s = merge_sign(ma, mb);
            const unsigned m = ma | mb;
            r.add(dz_part(n, m), dzbar_part(n, m), cplx(s) * (ca * cb));
        }
    return r;
}

namespace {

TnForm exterior_derivative(const TnForm& a, bool bar) {
    if (a.side() != Side::M || !a.is_polynomial())
        throw InvalidArgument("symbolic exterior derivative needs polynomial coefficients on M");
    const int n = a.n();
    if ((bar ? a.q() : a.p()) == n) return TnForm(n, a.p(), a.q(), a.side());  // degree exceeds n: zero
    TnForm r(n, a.p() + (bar ? 0 : 1), a.q() + (bar ? 1 : 0), a.side());
    for (const auto& [m, c] : a.terms())
        for (int p = 0; p < n; ++p) {
            const int g = bar ? n + p : p;
            if (m & (1u << g)) continue;
            const Polynomial dp = c.polynomial().derivative(p);
            if (dp.is_zero()) continue;
            const unsigned mm = m | (1u << g);
            r.add(dz_part(n, mm), dzbar_part(n, mm), Coefficient(cplx(0.5 * pass_sign(m, g)) * dp));
        }
    return r;
}

}  // namespace

TnForm dbar(const TnForm& a) { return exterior_derivative(a, true); }
TnForm del(const TnForm& a) { return exterior_derivative(a, false); }

double sup_coefficient(const TnForm& a, const std::vector<Vec>& points) {
    double m = 0.0;
    for (const Vec& x : points) m = std::max(m, sup_norm(a.value(x)));
    return m;
}

namespace {

FormPoint pointwise_derivative(const FormJet& a, Side side, const JetFrame& j, bool bar) {
    const int n = a.gens / 2;
    FormPoint out(a.gens);
    for (int p = 0; p < n; ++p) {
        FormPoint dp(a.gens);
        if (side == Side::M) {
            dp = partial(a, p);
        } else {
            for (int q = 0; q < n; ++q) dp += partial(a, q).scale(cplx(j.inverse_hessian(q, p)));
        }
        out += left_wedge(dp, bar ? n + p : p);
    }
    return out.scale(cplx(0.5));
}

}  // namespace

FormPoint dbar_at(const FormJet& a, Side side, const JetFrame& j) { return pointwise_derivative(a, side, j, true); }
FormPoint del_at(const FormJet& a, Side side, const JetFrame& j) { return pointwise_derivative(a, side, j, false); }

// ---------------------------------------------------------------- sl(2) operators

Mat kahler_matrix(Side side, const JetFrame& j) { return side == Side::M ? j.hessian : j.inverse_hessian; }

template <class S>
ExtVec<S> apply_op(OperatorTag t, const ExtVec<S>& a, const Mat& G) {
    const int n = a.gens / 2;
    ExtVec<S> r(a.gens);
    switch (t) {
        case OperatorTag::L_A:
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    if (G(j, k) != 0.0) r += left_wedge(left_wedge(a, n + k), j).scale(G(j, k));
            break;
        case OperatorTag::Lambda_A: {
            const Mat Gi = G.inverse();
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (Gi(b, c) != 0.0) r -= interior(interior(a, b), n + c).scale(Gi(b, c));
            break;
        }
        case OperatorTag::H_A:
            for (unsigned m = 0; m < a.size(); ++m) r.c[m] = a.c[m] * double(n - popcount(m));
            break;
        case OperatorTag::L_B:
            for (int j = 0; j < n; ++j) r += left_wedge(interior(a, j), n + j);
            break;
        case OperatorTag::Lambda_B:
            for (int j = 0; j < n; ++j) r -= left_wedge(interior(a, n + j), j);
            break;
        case OperatorTag::H_B:
            for (unsigned m = 0; m < a.size(); ++m)
                r.c[m] = a.c[m] * double(popcount(dz_part(n, m)) - popcount(dzbar_part(n, m)));
            break;
    }
    return r;
}

template ExtVec<cplx> apply_op(OperatorTag, const ExtVec<cplx>&, const Mat&);
template ExtVec<Field> apply_op(OperatorTag, const ExtVec<Field>&, const Mat&);

FormPoint apply(OperatorTag t, const FormPoint& a, Side side, const JetFrame& j) {
    return apply_op(t, a, kahler_matrix(side, j));
}

FormPoint apply(OperatorTag t, const TnForm& a, const JetFrame& j) {
    return apply(t, a.value(j.x), a.side(), j);
}

// ---------------------------------------------------------------- pairing

cplx pointwise_pairing(const FormPoint& a, const FormPoint& b, const Mat& Ginv) {
    const int n = form_n(a);
    const unsigned S = 1u << n;
    // det of (2 Ginv) minors for every pair of equal-size index sets
    std::vector<double> D(S * S, 0.0);
    for (unsigned I = 0; I < S; ++I)
        for (unsigned K = 0; K < S; ++K)
            if (popcount(I) == popcount(K))
                D[I * S + K] = minor_det<double>([&](int r, int c) { return 2.0 * Ginv(r, c); }, I, K);
    cplx s(0.0);
    for (unsigned ma = 0; ma < a.size(); ++ma) {
        if (a.c[ma] == cplx(0.0)) continue;
        const unsigned I = dz_part(n, ma), J = dzbar_part(n, ma);
        for (unsigned mb = 0; mb < b.size(); ++mb) {
            if (b.c[mb] == cplx(0.0)) continue;
            const unsigned K = dz_part(n, mb), L = dzbar_part(n, mb);
            if (popcount(I) != popcount(K) || popcount(J) != popcount(L)) continue;
            s += a.c[ma] * std::conj(b.c[mb]) * D[I * S + K] * D[J * S + L];
        }
    }
    return s;
}

double volume_density(Side side, const JetFrame& j, double covolume) {
    return side == Side::M ? covolume * j.det_hessian : covolume;
}

cplx inner_product(const TnForm& a, const TnForm& b, const Potential& phi, const Quadrature& quad, double covolume) {
    if (a.side() != b.side() || a.n() != b.n()) throw InvalidArgument("inner product of forms on different spaces");
    if (a.p() != b.p() || a.q() != b.q()) return 0.0;
    const Side side = a.side();
    return quad.integrate<cplx>([&](const Vec& x) {
        const JetFrame j = jet(phi, x);
        const Mat Ginv = side == Side::M ? j.inverse_hessian : j.hessian;
        return pointwise_pairing(a.value(x), b.value(x), Ginv) * volume_density(side, j, covolume);
    });
}

// ---------------------------------------------------------------- moduli vectors

TnForm moduli_form(const ModuliVector& v, int n) {
    TnForm f(n, 1, 1, Side::M);
    auto xi = v.xi;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            f.add(1u << j, 1u << k, Coefficient(Coefficient::Fn([xi, j, k, n](const Vec& x) {
                      const Derivs d = xi->eval(x, 3);
                      Field r(cplx(0.0, d.hess(j, k)));
                      for (int l = 0; l < n; ++l) r.g[l] = cplx(0.0, d.third(j, k, l));
                      return r;
                  })));
    return f;
}

std::vector<double> vhs_harmonic_residual(const ModuliVector& v, Side side, const std::vector<Vec>& points) {
    const int n = v.xi->dim();
    std::vector<double> out(n, 0.0);
    for (const Vec& x : points) {
        const Derivs d = v.xi->eval(x, 3);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += side == Side::M ? d.third(j, k, k) : d.third(k, k, j);
            out[j] = std::max(out[j], std::abs(s));
        }
    }
    return out;
}

}  // namespace msym
