#include "msym/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace msym {

double Tensor3::asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double t = (*this)(i, j, k);
                worst = std::max({worst, std::abs(t - (*this)(j, i, k)), std::abs(t - (*this)(i, k, j)),
                                  std::abs(t - (*this)(k, j, i))});
            }
    return worst;
}

void Tensor3::symmetrize() {
    Tensor3 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const Tensor3& t = *this;
                out(i, j, k) = (t(i, j, k) + t(i, k, j) + t(j, i, k) + t(j, k, i) + t(k, i, j) + t(k, j, i)) / 6.0;
            }
    *this = out;
}

double min_eigenvalue(const Mat& m) {
    if (m.rows() == 1) return m(0, 0);
    if (m.rows() == 2) {
        const double a = m(0, 0), b = 0.5 * (m(0, 1) + m(1, 0)), d = m(1, 1);
        const double mean = 0.5 * (a + d);
        const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
        return mean - rad;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::vector<unsigned> subsets_of_size(int n, int k) {
    std::vector<unsigned> out;
    for (unsigned s = 0; s < (1u << n); ++s)
        if (popcount(s) == k) out.push_back(s);
    return out;
}

}  // namespace msym
