#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msym/exterior.hpp"
#include "msym/geometry.hpp"
#include "msym/polynomial.hpp"
#include "msym/quadrature.hpp"

namespace msym {

// Which half of the mirror pair a form lives on. On W the same base chart x
// is used and derivatives in the dual coordinates x_p are taken through
// d/dx_p = sum_q phi^{qp} d/dx^q.
enum class Side { M, W };
std::string to_string(Side s);
Side side_from_string(const std::string& s);

// Pointwise (p,q)-forms on C^n: generators 0..n-1 are dz (dz^j on M, dz_j on
// W) and n..2n-1 are dz-bar. FormJet carries first derivatives in x.
using FormPoint = ExtVec<cplx>;
using FormJet = ExtVec<Field>;

inline unsigned form_mask(int n, unsigned I, unsigned J) { return I | (J << n); }
inline unsigned dz_part(int n, unsigned m) { return m & ((1u << n) - 1u); }
inline unsigned dzbar_part(int n, unsigned m) { return m >> n; }
inline int form_n(const ExtVec<cplx>& a) { return a.gens / 2; }

FormPoint values(const FormJet& a);
// Component k of the x-gradient of every coefficient.
FormPoint partial(const FormJet& a, int k);
// Restriction to the bidegree (p,q) part.
FormPoint bidegree_part(const FormPoint& a, int p, int q);

// Coefficient function of a form: a polynomial (kept symbolically so that
// exterior derivatives can be iterated exactly) or an arbitrary closure that
// returns value and gradient.
class Coefficient {
public:
    using Fn = std::function<Field(const Vec&)>;

    explicit Coefficient(Polynomial p) : poly_(std::move(p)) {}
    explicit Coefficient(Fn f) : fn_(std::move(f)) {}
    static Coefficient constant(int n, cplx c) { return Coefficient(Polynomial::constant(n, c)); }

    Field operator()(const Vec& x) const { return poly_ ? poly_->eval_field(x) : fn_(x); }
    bool is_polynomial() const { return poly_.has_value(); }
    const Polynomial& polynomial() const { return *poly_; }

    friend Coefficient operator+(const Coefficient& a, const Coefficient& b);
    friend Coefficient operator*(const Coefficient& a, const Coefficient& b);
    friend Coefficient operator*(cplx s, const Coefficient& a);

private:
    std::optional<Polynomial> poly_;
    Fn fn_;
};

// A T^n-invariant form of pure bidegree (p,q) whose coefficients depend on
// the base coordinates only. Terms are keyed by full mask; absent keys are zero.
class TnForm {
public:
    TnForm(int n, int p, int q, Side side);
    // Single term coeff * dz^I dz-bar^J (I, J bitmasks over 0..n-1).
    static TnForm monomial(int n, Side side, unsigned I, unsigned J, const Coefficient& c);
    static TnForm basis(int n, Side side, unsigned I, unsigned J, cplx c = 1.0);

    int n() const { return n_; }
    int p() const { return p_; }
    int q() const { return q_; }
    Side side() const { return side_; }
    const std::map<unsigned, Coefficient>& terms() const { return terms_; }

    // Adds c to the coefficient of dz^I dz-bar^J.
    void add(unsigned I, unsigned J, const Coefficient& c);
    bool is_polynomial() const;

    FormJet at(const Vec& x) const;
    FormPoint value(const Vec& x) const { return values(at(x)); }

    nlohmann::json to_json() const;
    static TnForm from_json(const nlohmann::json& j);

private:
    int n_, p_, q_;
    Side side_;
    std::map<unsigned, Coefficient> terms_;
};

// Symbolic algebra. wedge accepts any coefficients; dbar/del require
// polynomial coefficients on side M, where they are exact.
TnForm wedge(const TnForm& a, const TnForm& b);
TnForm dbar(const TnForm& a);
TnForm del(const TnForm& a);
double sup_coefficient(const TnForm& a, const std::vector<Vec>& points);

// Pointwise dbar = 1/2 sum_p dzbar^p ^ D_p and del = 1/2 sum_p dz^p ^ D_p,
// with D_p = d/dx^p on M and d/dx_p on W.
FormPoint dbar_at(const FormJet& a, Side side, const JetFrame& j);
FormPoint del_at(const FormJet& a, Side side, const JetFrame& j);

enum class OperatorTag { L_A, Lambda_A, H_A, L_B, Lambda_B, H_B };
std::string to_string(OperatorTag t);

// Matrix G of the Kahler form on a side: phi_jk on M, phi^{jk} on W.
Mat kahler_matrix(Side side, const JetFrame& j);

// The six operators with Kahler matrix G:
//   L_A = sum G_jk dz^j ^ dzbar^k ^,  Lambda_A = -sum (G^-1)_jk i(dzbar^k) i(dz^j),
//   H_A = n - deg,  L_B = sum dzbar^j ^ i(dz^j),  Lambda_B = -sum dz^j ^ i(dzbar^j),  H_B = p - q.
template <class S>
ExtVec<S> apply_op(OperatorTag t, const ExtVec<S>& a, const Mat& G);
FormPoint apply(OperatorTag t, const FormPoint& a, Side side, const JetFrame& j);
FormPoint apply(OperatorTag t, const TnForm& a, const JetFrame& j);

// Pointwise pairing sum a conj(b) with <dz^j, dz^k> = 2 (G^-1)_jk per index,
// extended by determinants to decomposable forms.
cplx pointwise_pairing(const FormPoint& a, const FormPoint& b, const Mat& Ginv);
// Volume density per unit dx of the L2 pairing: V dv_D = covolume det phi dx
// on M and V^{-1} dv_{D*} = covolume dx on W.
double volume_density(Side side, const JetFrame& j, double covolume);
cplx inner_product(const TnForm& a, const TnForm& b, const Potential& phi, const Quadrature& quad,
                   double covolume = 1.0);

// A deformation of the Kahler class given by a potential xi.
struct ModuliVector {
    ScalarFieldPtr xi;
};

// i sum xi_jk dz^j ^ dzbar^k on side M.
TnForm moduli_form(const ModuliVector& v, int n);
// Per index: sup over points of |sum_k xi_jkk| (M) or |sum_j xi_jjk| (W).
std::vector<double> vhs_harmonic_residual(const ModuliVector& v, Side side, const std::vector<Vec>& points);

}  // namespace msym
