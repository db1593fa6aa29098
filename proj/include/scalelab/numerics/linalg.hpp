#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "scalelab/errors.hpp"
#include "scalelab/numerics/matrix.hpp"

namespace scalelab {

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Thin SVD  A = U diag(s) V'  with singular values sorted descending.
/// U is rows x cols, V is cols x cols.
struct Svd {
    Matrix u;
    Vector singular_values;
    Matrix v;
};

/// One-sided Jacobi (Hestenes) SVD for rows >= cols. Orthogonalizes the
/// columns of A by plane rotations; accurate to working precision for the
/// small, dense designs used here.
inline Svd svd(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m < n) throw DimensionMismatch("svd requires rows >= cols");

    // Column-major working copies make the column rotations contiguous.
    std::vector<Vector> u(n, Vector(m));
    std::vector<Vector> v(n, Vector(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) u[j][i] = a(i, j);
        v[j][j] = 1.0;
    }

    constexpr double eps = 1e-15;
    constexpr int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += u[p][i] * u[p][i];
                    beta += u[q][i] * u[q][i];
                    gamma += u[p][i] * u[q][i];
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u[p][i];
                    const double uq = u[q][i];
                    u[p][i] = c * up - s * uq;
                    u[q][i] = s * up + c * uq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v[p][i];
                    const double vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    Vector sv(n);
    for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(u[j]);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });

    Svd out{Matrix(m, n), Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.singular_values[k] = sv[j];
        const double inv = sv[j] > 0.0 ? 1.0 / sv[j] : 0.0;
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = u[j][i] * inv;
        for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v[j][i];
    }
    return out;
}

/// Numerical rank: singular values above kRankTolerance * sigma_max.
inline std::size_t numerical_rank(std::span<const double> singular_values) {
    if (singular_values.empty() || singular_values[0] <= 0.0) return 0;
    const double cutoff = kRankTolerance * singular_values[0];
    return static_cast<std::size_t>(std::count_if(singular_values.begin(), singular_values.end(),
                                                  [&](double s) { return s > cutoff; }));
}

struct LstSqSolution {
    Vector coefficients;
    Vector residuals;
    Vector hat_diagonals;
    std::size_t rank = 0;
    Matrix xtx_inverse; ///< (X'X)^-1, or its pseudo-inverse when rank deficient
};

enum class RankPolicy { reject, pseudo_inverse };

/// Minimum-norm least-squares solution of X b ~ y through the SVD of X.
/// Throws RankDeficient unless `policy` asks for the pseudo-inverse solution.
inline LstSqSolution solve_least_squares(const Matrix& x, std::span<const double> y,
                                         RankPolicy policy = RankPolicy::reject) {
    if (x.cols() == 0 || x.rows() < x.cols())
        throw DimensionMismatch("least squares needs rows >= cols >= 1");
    if (y.size() != x.rows()) throw DimensionMismatch("response length != design rows");
    if (!x.all_finite() || !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
        throw InvalidParameter("least squares inputs must be finite");

    const std::size_t m = x.rows();
    const std::size_t n = x.cols();
    const Svd d = svd(x);
    const std::size_t rank = numerical_rank(d.singular_values);
    if (rank < n && policy == RankPolicy::reject) throw RankDeficient(rank, n);

    LstSqSolution sol;
    sol.rank = rank;
    sol.coefficients.assign(n, 0.0);
    for (std::size_t k = 0; k < rank; ++k) {
        double uty = 0.0;
        for (std::size_t i = 0; i < m; ++i) uty += d.u(i, k) * y[i];
        const double w = uty / d.singular_values[k];
        for (std::size_t j = 0; j < n; ++j) sol.coefficients[j] += d.v(j, k) * w;
    }

    const Vector fitted = x * sol.coefficients;
    sol.residuals.resize(m);
    for (std::size_t i = 0; i < m; ++i) sol.residuals[i] = y[i] - fitted[i];

    sol.hat_diagonals.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double h = 0.0;
        for (std::size_t k = 0; k < rank; ++k) h += d.u(i, k) * d.u(i, k);
        sol.hat_diagonals[i] = std::clamp(h, 0.0, 1.0);
    }

    sol.xtx_inverse = Matrix(n, n);
    for (std::size_t k = 0; k < rank; ++k) {
        const double w = 1.0 / (d.singular_values[k] * d.singular_values[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) sol.xtx_inverse(i, j) += w * d.v(i, k) * d.v(j, k);
    }
    return sol;
}

/// Ratio of largest to smallest singular value.
inline double condition_number(const Matrix& x) {
    if (x.empty()) throw DimensionMismatch("condition number of an empty matrix");
    const Svd d = x.rows() >= x.cols() ? svd(x) : svd(x.transpose());
    const double smax = d.singular_values.front();
    const double smin = d.singular_values.back();
    if (smax == 0.0) throw SingularMatrix("condition number of a zero matrix");
    if (smin == 0.0) throw SingularMatrix("smallest singular value is zero");
    return smax / smin;
}

} // namespace scalelab
