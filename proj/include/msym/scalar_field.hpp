#pragma once

#include <memory>
#include <string>

#include "msym/field.hpp"
#include "msym/linalg.hpp"

namespace msym {

// Value and derivatives of a real scalar function up to a requested order.
// Entries above the requested order are left empty / zero.
struct Derivs {
    double value = 0.0;
    Vec grad;
    Mat hess;
    Tensor3 third;
};

// A real function on (a region of) R^n with derivatives to order 3.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual int dim() const = 0;
    virtual Derivs eval(const Vec& x, int order) const = 0;

    double value(const Vec& x) const { return eval(x, 0).value; }
    Vec gradient(const Vec& x) const { return eval(x, 1).grad; }
    Mat hessian(const Vec& x) const { return eval(x, 2).hess; }
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

// Lift the gradient of a scalar field to a Field carrying the Hessian row as
// its own gradient: entry k is (f_k, [f_k1 ... f_kn]).
std::array<Field, kMaxDim> gradient_fields(const Derivs& d, int n);

}  // namespace msym
