#include "msym/polynomial.hpp"

#include <cmath>

#include "msym/errors.hpp"

namespace msym {

std::array<Field, kMaxDim> gradient_fields(const Derivs& d, int n) {
    std::array<Field, kMaxDim> out{};
    for (int k = 0; k < n; ++k) {
        out[k].v = d.grad(k);
        for (int l = 0; l < n; ++l) out[k].g[l] = d.hess(k, l);
    }
    return out;
}

Polynomial Polynomial::constant(int n, cplx c) {
    Polynomial p(n);
    p.add_term(Exponent{}, c);
    return p;
}

Polynomial Polynomial::variable(int n, int k) {
    Exponent e{};
    e[k] = 1;
    return monomial(n, e);
}

Polynomial Polynomial::monomial(int n, const Exponent& e, cplx c) {
    Polynomial p(n);
    p.add_term(e, c);
    return p;
}

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int i = 0; i < n_; ++i) s += e[i];
        d = std::max(d, s);
    }
    return d;
}

bool Polynomial::is_zero(double tol) const {
    for (const auto& [e, c] : terms_)
        if (std::abs(c) > tol) return false;
    return true;
}

void Polynomial::add_term(const Exponent& e, cplx c) {
    if (c == cplx(0.0)) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (it->second == cplx(0.0)) terms_.erase(it);
    }
}

Polynomial Polynomial::derivative(int k) const {
    Polynomial d(n_);
    for (const auto& [e, c] : terms_) {
        if (e[k] == 0) continue;
        Exponent f = e;
        f[k] -= 1;
        d.add_term(f, c * static_cast<double>(e[k]));
    }
    return d;
}

namespace {
double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}
}  // namespace

cplx Polynomial::operator()(const Vec& x) const {
    cplx s = 0.0;
    for (const auto& [e, c] : terms_) {
        double m = 1.0;
        for (int i = 0; i < n_; ++i) m *= ipow(x(i), e[i]);
        s += c * m;
    }
    return s;
}

Field Polynomial::eval_field(const Vec& x) const {
    Field f;
    for (const auto& [e, c] : terms_) {
        double m = 1.0;
        for (int i = 0; i < n_; ++i) m *= ipow(x(i), e[i]);
        f.v += c * m;
        for (int k = 0; k < n_; ++k) {
            if (e[k] == 0) continue;
            double dm = static_cast<double>(e[k]);
            for (int i = 0; i < n_; ++i) dm *= ipow(x(i), i == k ? e[i] - 1 : e[i]);
            f.g[k] += c * dm;
        }
    }
    return f;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (n_ == 0) n_ = o.n_;
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (n_ == 0) n_ = o.n_;
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(cplx s) {
    if (s == cplx(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r(std::max(a.n_, b.n_));
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            Polynomial::Exponent e{};
            for (int i = 0; i < kMaxDim; ++i) e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    return r;
}

Polynomial Polynomial::random(int n, int deg, std::mt19937_64& rng, double scale, bool complex_coeffs) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Polynomial p(n);
    Exponent e{};
    // enumerate exponents with total degree <= deg in lexicographic order
    auto rec = [&](auto&& self, int var, int left) -> void {
        if (var == n) {
            const double re = u(rng);
            const double im = complex_coeffs ? u(rng) : 0.0;
            p.add_term(e, cplx(re, im));
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[var] = k;
            self(self, var + 1, left - k);
        }
        e[var] = 0;
    };
    rec(rec, 0, deg);
    return p;
}

nlohmann::json Polynomial::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [e, c] : terms_) {
        std::vector<int> ex(e.begin(), e.begin() + n_);
        terms.push_back({{"exp", ex}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"n", n_}, {"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
    Polynomial p(j.at("n").get<int>());
    for (const auto& t : j.at("terms")) {
        Exponent e{};
        const auto ex = t.at("exp").get<std::vector<int>>();
        if (static_cast<int>(ex.size()) != p.n_) throw InvalidArgument("exponent arity mismatch");
        for (std::size_t i = 0; i < ex.size(); ++i) e[i] = ex[i];
        p.add_term(e, cplx(t.at("re").get<double>(), t.value("im", 0.0)));
    }
    return p;
}

PolynomialField::PolynomialField(Polynomial p) : p_(std::move(p)) {
    const int n = p_.dim();
    for (int i = 0; i < n; ++i) d1_.push_back(p_.derivative(i));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2_.push_back(d1_[i].derivative(j));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) d3_.push_back(d2_[i * n + j].derivative(k));
}

Derivs PolynomialField::eval(const Vec& x, int order) const {
    const int n = p_.dim();
    Derivs d;
    d.value = p_(x).real();
    if (order >= 1) {
        d.grad.resize(n);
        for (int i = 0; i < n; ++i) d.grad(i) = d1_[i](x).real();
    }
    if (order >= 2) {
        d.hess.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d.hess(i, j) = d2_[i * n + j](x).real();
    }
    if (order >= 3) {
        d.third = Tensor3(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) d.third(i, j, k) = d3_[(i * n + j) * n + k](x).real();
    }
    return d;
}

}  // namespace msym
