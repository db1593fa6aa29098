#pragma once

// Regularized incomplete gamma/beta functions and the four distribution
// families needed for regression inference. Everything is computed in-repo
// so p-values do not depend on the platform's libm special functions.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "scalelab/errors.hpp"

namespace scalelab {
namespace special {

inline constexpr double kEps = 1e-16;
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxIter = 100000;

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, 9 terms; ~1e-15 relative).
inline double log_gamma(double x) {
    static constexpr std::array<double, 9> c = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (!(x > 0.0)) throw InvalidParameter("log_gamma requires x > 0");
    if (x < 0.5) {
        // reflection keeps the series in its accurate range
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double sum = c[0];
    for (int i = 1; i < 9; ++i) sum += c[static_cast<std::size_t>(i)] / (z + i);
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

namespace detail {

// Power-series for P(a, x), valid for x < a + 1.
inline double gamma_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1 (modified Lentz).
inline double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidParameter(std::string(what) + " must be positive and finite");
}

} // namespace detail

/// Lower regularized incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    detail::require_positive(a, "gamma shape");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return detail::gamma_series(a, x);
    return 1.0 - detail::gamma_continued_fraction(a, x);
}

/// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x), computed without cancellation.
inline double gamma_q(double a, double x) {
    detail::require_positive(a, "gamma shape");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_series(a, x);
    return detail::gamma_continued_fraction(a, x);
}

/// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
struct BetaPair {
    double lower;
    double upper;
};

inline BetaPair incomplete_beta_pair(double a, double b, double x) {
    detail::require_positive(a, "beta a");
    detail::require_positive(b, "beta b");
    if (x <= 0.0) return {0.0, 1.0};
    if (x >= 1.0) return {1.0, 0.0};
    const double front = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lo = front * detail::beta_continued_fraction(a, b, x) / a;
        return {lo, 1.0 - lo};
    }
    const double up = front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
    return {1.0 - up, up};
}

inline double incomplete_beta(double a, double b, double x) {
    return incomplete_beta_pair(a, b, x).lower;
}

} // namespace special

// ---------------------------------------------------------------------------

namespace detail {

// Inverts a monotone cdf by bracketing and bisection.
template <typename Cdf>
double invert_cdf(Cdf cdf, double p, double lo, double hi) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("quantile probability must be in (0, 1)");
    while (cdf(lo) > p) lo *= 2.0;
    while (cdf(hi) < p) hi *= 2.0;
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Standard normal distribution.
struct Normal {
    double cdf(double x) const {
        const double q = 0.5 * special::gamma_q(0.5, 0.5 * x * x);
        return x < 0.0 ? q : 1.0 - q;
    }
    double sf(double x) const { return cdf(-x); }
    double quantile(double p) const {
        if (p == 0.5) return 0.0;
        return detail::invert_cdf([this](double v) { return cdf(v); }, p, -1.0, 1.0);
    }
};

/// Student's t with `df` degrees of freedom.
struct StudentT {
    double df;

    explicit StudentT(double dof) : df(dof) {
        if (!(dof > 0.0) || !std::isfinite(dof))
            throw InvalidParameter("student_t degrees of freedom must be positive");
    }

    double cdf(double t) const {
        if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
        const double tail = 0.5 * special::incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
        return t < 0.0 ? tail : 1.0 - tail;
    }
    double sf(double t) const { return cdf(-t); }

    /// Two-sided p-value for a t statistic.
    double two_sided_p(double t) const {
        if (std::isinf(t)) return 0.0;
        return special::incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    }

    double quantile(double p) const {
        if (p == 0.5) return 0.0;
        return detail::invert_cdf([this](double v) { return cdf(v); }, p, -1.0, 1.0);
    }
};

/// Chi-squared with `df` degrees of freedom.
struct ChiSquared {
    double df;

    explicit ChiSquared(double dof) : df(dof) {
        if (!(dof > 0.0) || !std::isfinite(dof))
            throw InvalidParameter("chi_squared degrees of freedom must be positive");
    }

    double cdf(double x) const { return special::gamma_p(0.5 * df, 0.5 * x); }
    double sf(double x) const { return special::gamma_q(0.5 * df, 0.5 * x); }
};

/// Fisher-Snedecor F with (d1, d2) degrees of freedom.
struct FisherF {
    double d1;
    double d2;

    FisherF(double dof1, double dof2) : d1(dof1), d2(dof2) {
        if (!(dof1 > 0.0) || !(dof2 > 0.0) || !std::isfinite(dof1) || !std::isfinite(dof2))
            throw InvalidParameter("F degrees of freedom must be positive");
    }

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        return special::incomplete_beta_pair(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2)).lower;
    }
    double sf(double x) const {
        if (x <= 0.0) return 1.0;
        return special::incomplete_beta_pair(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x)).lower;
    }
};

enum class Family { normal, student_t, chi_squared, f };

/// Family-dispatched cdf. `df1`/`df2` are ignored where the family has fewer parameters.
inline double dist_cdf(Family family, double x, double df1 = 0.0, double df2 = 0.0) {
    if (!std::isfinite(x) && !std::isinf(x)) throw InvalidParameter("cdf argument is NaN");
    switch (family) {
    case Family::normal: return Normal{}.cdf(x);
    case Family::student_t: return StudentT(df1).cdf(x);
    case Family::chi_squared: return ChiSquared(df1).cdf(x);
    case Family::f: return FisherF(df1, df2).cdf(x);
    }
    throw InvalidParameter("unknown distribution family");
}

} // namespace scalelab
