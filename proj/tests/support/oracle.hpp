// Test-only reference implementations, deliberately independent of the
// library's SVD route: plain normal equations plus hand-rolled
// Gauss-Jordan elimination.
#ifndef TPPI_TESTS_ORACLE_HPP
#define TPPI_TESTS_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;  // row-major

inline Mat transpose(const Mat& a) {
    if (a.empty()) return {};
    Mat t(a[0].size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

/// Gauss-Jordan with partial pivoting on a square system. Returns nullopt
/// when a pivot falls below `pivot_tol` (treated as singular).
inline std::optional<std::vector<double>> gauss_solve(Mat a, std::vector<double> b,
                                                      double pivot_tol = 1e-10) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < pivot_tol) return std::nullopt;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);

        const double inv = 1.0 / a[col][col];
        for (std::size_t j = col; j < n; ++j) a[col][j] *= inv;
        b[col] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
            b[r] -= f * b[col];
        }
    }
    return b;
}

/// Full-rank pseudoinverse solution by normal equations:
///   rows >= cols:  x = (A^T A)^-1 A^T b        (least squares)
///   rows <  cols:  x = A^T (A A^T)^-1 b        (minimum norm interpolant)
/// Returns nullopt when the normal matrix is numerically singular.
inline std::optional<std::vector<double>> pinv_solve(const Mat& a, const std::vector<double>& b) {
    const Mat at = transpose(a);
    if (a.size() >= a[0].size()) {
        auto x = gauss_solve(matmul(at, a), matvec(at, b));
        return x;
    }
    auto z = gauss_solve(matmul(a, at), b);
    if (!z) return std::nullopt;
    return matvec(at, *z);
}

}  // namespace oracle

#endif  // TPPI_TESTS_ORACLE_HPP
