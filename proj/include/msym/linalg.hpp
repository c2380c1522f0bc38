#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

namespace msym {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr int kMaxDim = 4;

// Fully symmetric rank-3 array T(i,j,k) for n <= kMaxDim, stored densely.
struct Tensor3 {
    int n = 0;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> a{};

    Tensor3() = default;
    explicit Tensor3(int dim) : n(dim) {}

    double& operator()(int i, int j, int k) { return a[(i * kMaxDim + j) * kMaxDim + k]; }
    double operator()(int i, int j, int k) const { return a[(i * kMaxDim + j) * kMaxDim + k]; }

    // Largest deviation from full index symmetry.
    double asymmetry() const;
    void symmetrize();
};

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& m);

// Max-norm of a matrix (largest absolute entry).
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
}

// Subsets of {0..n-1} as bitmasks with exactly k bits, ascending.
std::vector<unsigned> subsets_of_size(int n, int k);

// Determinant of the minor picked out by row/column bitmasks of equal size,
// by permutation expansion. `get(i, j)` returns an entry of any scalar type
// closed under + and *, so the same routine serves doubles and Fields.
template <class S, class Get>
S minor_det(Get&& get, unsigned rows, unsigned cols);

int popcount(unsigned x);

}  // namespace msym

#include "msym/linalg_impl.hpp"
