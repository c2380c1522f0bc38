#pragma once

#include <array>
#include <map>
#include <random>

#include <json.hpp>

#include "msym/scalar_field.hpp"

namespace msym {

// Multivariate polynomial in n <= 4 variables with complex coefficients.
class Polynomial {
public:
    using Exponent = std::array<int, kMaxDim>;

    Polynomial() = default;
    explicit Polynomial(int n) : n_(n) {}

    static Polynomial constant(int n, cplx c);
    static Polynomial variable(int n, int k);
    static Polynomial monomial(int n, const Exponent& e, cplx c = 1.0);

    int dim() const { return n_; }
    int degree() const;
    bool is_zero(double tol = 0.0) const;
    const std::map<Exponent, cplx>& terms() const { return terms_; }

    void add_term(const Exponent& e, cplx c);

    Polynomial derivative(int k) const;
    cplx operator()(const Vec& x) const;
    Field eval_field(const Vec& x) const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(cplx s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, cplx s) { return a *= s; }
    friend Polynomial operator*(cplx s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

    // Uniform random coefficients in [-scale, scale] on all monomials up to
    // total degree `deg`; imaginary parts only if `complex_coeffs`.
    static Polynomial random(int n, int deg, std::mt19937_64& rng, double scale = 1.0,
                             bool complex_coeffs = false);

    nlohmann::json to_json() const;
    static Polynomial from_json(const nlohmann::json& j);

private:
    int n_ = 0;
    std::map<Exponent, cplx> terms_;
};

// Real part of a polynomial viewed as a scalar field.
class PolynomialField : public ScalarField {
public:
    explicit PolynomialField(Polynomial p);
    int dim() const override { return p_.dim(); }
    Derivs eval(const Vec& x, int order) const override;
    const Polynomial& polynomial() const { return p_; }

private:
    Polynomial p_;
    std::vector<Polynomial> d1_;
    std::vector<Polynomial> d2_;
    std::vector<Polynomial> d3_;
};

}  // namespace msym
