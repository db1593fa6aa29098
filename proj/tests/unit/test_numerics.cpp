#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "scalelab/numerics/distributions.hpp"
#include "scalelab/numerics/linalg.hpp"

using namespace scalelab;

TEST(Matrix, MultiplyAndTranspose) {
    const Matrix a{{1, 2}, {3, 4}, {5, 6}};
    const Matrix at = a.transpose();
    EXPECT_EQ(at.rows(), 2u);
    EXPECT_EQ(at(1, 2), 6.0);
    const Matrix g = at * a;
    EXPECT_EQ(g(0, 0), 35.0);
    EXPECT_EQ(g(0, 1), 44.0);
    EXPECT_EQ(g(1, 1), 56.0);
    const Vector v = a * Vector{1.0, -1.0};
    EXPECT_EQ(v, (Vector{-1.0, -1.0, -1.0}));
}

TEST(Matrix, RaggedLiteralThrows) { EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionMismatch); }

TEST(Matrix, EntryCountMismatchThrows) { EXPECT_THROW(Matrix(2, 2, Vector{1, 2, 3}), DimensionMismatch); }

TEST(Svd, ReconstructsInput) {
    std::mt19937_64 g(7);
    const Matrix a = testgen::design(g, 9, 3);
    const Svd d = svd(a);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += d.u(i, k) * d.singular_values[k] * d.v(j, k);
            EXPECT_NEAR(s, a(i, j), 1e-12);
        }
    for (std::size_t k = 1; k < d.singular_values.size(); ++k)
        EXPECT_GE(d.singular_values[k - 1], d.singular_values[k]);
}

TEST(LeastSquares, ExactLine) {
    const Matrix x{{1, 1}, {1, 2}, {1, 3}};
    const Vector y{2, 4, 6};
    const auto sol = solve_least_squares(x, y);
    EXPECT_NEAR(sol.coefficients[0], 0.0, 1e-12);
    EXPECT_NEAR(sol.coefficients[1], 2.0, 1e-12);
    for (double r : sol.residuals) EXPECT_NEAR(r, 0.0, 1e-12);
    EXPECT_EQ(sol.rank, 2u);
}

TEST(LeastSquares, RankDeficientRejected) {
    const Matrix x{{1, 1, 2}, {1, 2, 4}, {1, 3, 6}, {1, 4, 8}};
    const Vector y{1, 2, 3, 4};
    try {
        solve_least_squares(x, y);
        FAIL() << "expected RankDeficient";
    } catch (const RankDeficient& e) {
        EXPECT_EQ(e.rank(), 2u);
    }
    const auto sol = solve_least_squares(x, y, RankPolicy::pseudo_inverse);
    EXPECT_EQ(sol.rank, 2u);
    for (double r : sol.residuals) EXPECT_NEAR(r, 0.0, 1e-10);
}

TEST(LeastSquares, UnderdeterminedAndNonFinite) {
    EXPECT_THROW(solve_least_squares(Matrix{{1, 2, 3}}, Vector{1}), DimensionMismatch);
    EXPECT_THROW(solve_least_squares(Matrix{{1, 1}, {1, 2}}, Vector{1}), DimensionMismatch);
    EXPECT_THROW(solve_least_squares(Matrix{{1, NAN}, {1, 2}}, Vector{1, 2}), InvalidParameter);
}

TEST(LeastSquares, ResidualOrthogonalityProperty) {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 6 + static_cast<std::size_t>(trial % 30);
        const std::size_t p = 1 + static_cast<std::size_t>(trial % 4);
        const Matrix x = testgen::design(g, n, p);
        Vector beta(p + 1);
        for (double& b : beta) b = testgen::normal(g, 3.0);
        const Vector y = testgen::response(g, x, beta, 0.5);
        const auto sol = solve_least_squares(x, y);
        const double scale = norm2(y) * std::sqrt(static_cast<double>(n));
        for (std::size_t j = 0; j < x.cols(); ++j) EXPECT_NEAR(dot(x.column(j), sol.residuals), 0.0, 1e-10 * scale);
        double trace = 0.0;
        for (double h : sol.hat_diagonals) {
            EXPECT_GE(h, 0.0);
            EXPECT_LE(h, 1.0);
            trace += h;
        }
        EXPECT_NEAR(trace, static_cast<double>(p + 1), 1e-9);
    }
}

TEST(ConditionNumber, IdentityIsOne) { EXPECT_NEAR(condition_number(Matrix::identity(4)), 1.0, 1e-14); }

TEST(ConditionNumber, DiagonalRatio) {
    const Matrix a{{10, 0}, {0, 0.5}, {0, 0}};
    EXPECT_NEAR(condition_number(a), 20.0, 1e-12);
}

TEST(ConditionNumber, SingularThrows) {
    EXPECT_THROW(condition_number(Matrix{{1, 2}, {2, 4}}), SingularMatrix);
    EXPECT_THROW(condition_number(Matrix(3, 2, 0.0)), SingularMatrix);
}

TEST(ConditionNumber, InvariantUnderOrthogonalRotation) {
    std::mt19937_64 g(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = testgen::design(g, 12, 3);
        const double theta = testgen::uniform(g, 0.0, 6.28);
        Matrix q = Matrix::identity(12);
        q(0, 0) = std::cos(theta);
        q(0, 1) = -std::sin(theta);
        q(1, 0) = std::sin(theta);
        q(1, 1) = std::cos(theta);
        EXPECT_NEAR(condition_number(q * a) / condition_number(a), 1.0, 1e-10);
    }
}

// Reference values computed with scipy.special / scipy.stats.
TEST(SpecialFunctions, MatchReferenceValues) {
    EXPECT_NEAR(special::log_gamma(0.5), 0.5723649429247001, 1e-13);
    EXPECT_NEAR(special::log_gamma(10.3), 13.482036786138359, 1e-12);
    EXPECT_NEAR(special::log_gamma(1.0), 0.0, 1e-14);
    EXPECT_NEAR(special::gamma_p(2.5, 1.7), 0.36143007689620493, 1e-12);
    EXPECT_NEAR(special::gamma_q(30.0, 25.0), 0.8178960840225449, 1e-12);
    EXPECT_NEAR(special::incomplete_beta(2.5, 3.5, 0.4), 0.4869041915261176, 1e-12);
    EXPECT_NEAR(special::incomplete_beta(0.5, 0.5, 0.999), 0.9798649583666235, 1e-12);
    EXPECT_EQ(special::incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(special::incomplete_beta(2.0, 3.0, 1.0), 1.0);
}

TEST(SpecialFunctions, InvalidArguments) {
    EXPECT_THROW(special::gamma_p(-1.0, 1.0), InvalidParameter);
    EXPECT_THROW(special::incomplete_beta(1.0, 0.0, 0.5), InvalidParameter);
}

TEST(Distributions, NormalCdf) {
    EXPECT_NEAR(Normal{}.cdf(1.959964), 0.975, 1e-6);
    EXPECT_NEAR(Normal{}.cdf(-3.5), 0.00023262907903552502, 1e-15);
    EXPECT_NEAR(Normal{}.quantile(0.995), 2.5758293035489004, 1e-9);
    EXPECT_EQ(Normal{}.cdf(0.0), 0.5);
}

TEST(Distributions, StudentT) {
    const StudentT t12(12);
    EXPECT_NEAR(t12.cdf(2.1788), 0.9749994256954766, 1e-10);
    EXPECT_NEAR(t12.quantile(0.975), 2.1788128296634177, 1e-9);
    EXPECT_NEAR(StudentT(3).cdf(-1.2), 0.15813105734905245, 1e-12);
    EXPECT_NEAR(t12.two_sided_p(2.0), 0.06865501403808597, 1e-12);
}

TEST(Distributions, ChiSquared) {
    EXPECT_NEAR(ChiSquared(3).sf(5.628), 0.13118011851723715, 1e-10);
    EXPECT_NEAR(ChiSquared(3).sf(5.628), 0.131, 1e-3);
    EXPECT_NEAR(ChiSquared(2).sf(0.357), 0.8365240568773924, 1e-12);
    EXPECT_NEAR(ChiSquared(10).cdf(7.5), 0.32245236389545656, 1e-12);
    EXPECT_NEAR(ChiSquared(1).cdf(0.001), 0.02522712063003961, 1e-12);
}

TEST(Distributions, FisherF) {
    EXPECT_NEAR(FisherF(3, 12).sf(2.170), 0.14458411359878598, 1e-10);
    EXPECT_NEAR(FisherF(1, 11).sf(0.015), 0.9047321946940886, 1e-10);
    EXPECT_NEAR(FisherF(5, 20).cdf(1.3), 0.6965945194589256, 1e-10);
}

TEST(Distributions, InvalidDegreesOfFreedom) {
    EXPECT_THROW(StudentT(0), InvalidParameter);
    EXPECT_THROW(ChiSquared(-1), InvalidParameter);
    EXPECT_THROW(FisherF(1, 0), InvalidParameter);
    EXPECT_THROW(dist_cdf(Family::normal, NAN), InvalidParameter);
}

TEST(Distributions, CdfMonotoneAndSymmetric) {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double df = testgen::uniform(g, 0.5, 60.0);
        const double df2 = testgen::uniform(g, 0.5, 60.0);
        double prev_n = 0.0, prev_t = 0.0, prev_c = 0.0, prev_f = 0.0;
        for (double x = -8.0; x <= 8.0; x += 0.25) {
            const double n = dist_cdf(Family::normal, x);
            const double t = dist_cdf(Family::student_t, x, df);
            const double c = dist_cdf(Family::chi_squared, x + 8.0, df);
            const double f = dist_cdf(Family::f, (x + 8.0) / 4.0, df, df2);
            EXPECT_GE(n, prev_n);
            EXPECT_GE(t, prev_t);
            EXPECT_GE(c, prev_c);
            EXPECT_GE(f, prev_f);
            for (double v : {n, t, c, f}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
            EXPECT_NEAR(n + dist_cdf(Family::normal, -x), 1.0, 1e-14);
            EXPECT_NEAR(t + dist_cdf(Family::student_t, -x, df), 1.0, 1e-13);
            prev_n = n;
            prev_t = t;
            prev_c = c;
            prev_f = f;
        }
    }
}

TEST(Distributions, QuantileInvertsCdf) {
    for (double df : {1.0, 2.5, 12.0, 200.0})
        for (double p : {0.001, 0.025, 0.3, 0.5, 0.9, 0.999}) {
            const StudentT t(df);
            EXPECT_NEAR(t.cdf(t.quantile(p)), p, 1e-10);
        }
}
