#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scalelab/errors.hpp"
#include "scalelab/numerics/distributions.hpp"
#include "scalelab/numerics/linalg.hpp"
#include "scalelab/ols.hpp"

namespace scalelab {

/// A test statistic with its p-value (absent for DW and the condition number).
struct TestStatistic {
    double statistic = 0.0;
    std::optional<double> p_value;
};

struct BreuschPagan {
    TestStatistic lm; ///< n R^2_aux ~ chi2(k - 1)
    TestStatistic f;  ///< ~ F(k - 1, n - k)
};

namespace detail {

inline void require_nondegenerate(std::span<const double> e) {
    double ss = 0.0;
    for (double v : e) ss += v * v;
    if (!(ss > 0.0)) throw DegenerateResiduals("all residuals are zero");
}

// Central moments m2, m3, m4 (population normalization, 1/n).
struct Moments {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

inline Moments central_moments(std::span<const double> e) {
    const double n = static_cast<double>(e.size());
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= n;
    Moments m;
    for (double v : e) {
        const double d = v - mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    if (!(m.m2 > 0.0)) throw DegenerateResiduals("residuals have zero variance");
    return m;
}

// Residuals negligible relative to the response spread: the fit is exact.
inline bool exact_fit(const OlsFit& f) { return f.sse <= 1e-24 * f.sst; }

} // namespace detail

/// Breusch-Pagan (Koenker studentized form): squared residuals regressed on
/// the fit's full design.
inline BreuschPagan breusch_pagan(const OlsFit& f) {
    if (f.k < 2) throw InvalidParameter("Breusch-Pagan needs at least one non-intercept regressor");
    if (f.n <= f.k) throw SampleTooSmall("Breusch-Pagan needs n > k");
    detail::require_nondegenerate(f.residuals);
    if (detail::exact_fit(f)) throw DegenerateResiduals("residuals are numerically zero");

    Vector e2(f.n);
    for (std::size_t i = 0; i < f.n; ++i) e2[i] = f.residuals[i] * f.residuals[i];
    const LstSqSolution aux = solve_least_squares(f.frame.x, e2);
    double mean = 0.0;
    for (double v : e2) mean += v;
    mean /= static_cast<double>(f.n);
    double sst = 0.0, sse = 0.0;
    for (std::size_t i = 0; i < f.n; ++i) {
        sst += (e2[i] - mean) * (e2[i] - mean);
        sse += aux.residuals[i] * aux.residuals[i];
    }
    if (!(sst > 0.0)) throw DegenerateResiduals("squared residuals are constant");
    const double r2 = 1.0 - sse / sst;
    const double n = static_cast<double>(f.n);
    const double df1 = static_cast<double>(f.k - 1);
    const double df2 = static_cast<double>(f.n - f.k);

    BreuschPagan out;
    out.lm.statistic = n * r2;
    out.lm.p_value = ChiSquared(df1).sf(out.lm.statistic);
    out.f.statistic = (r2 / df1) / ((1.0 - r2) / df2);
    out.f.p_value = FisherF(df1, df2).sf(out.f.statistic);
    return out;
}

/// Sum of squared successive differences over the sum of squares.
inline double durbin_watson(std::span<const double> residuals) {
    if (residuals.size() < 2) throw SampleTooSmall("Durbin-Watson needs at least two residuals");
    detail::require_nondegenerate(residuals);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < residuals.size(); ++t) {
        den += residuals[t] * residuals[t];
        if (t > 0) {
            const double d = residuals[t] - residuals[t - 1];
            num += d * d;
        }
    }
    return num / den;
}

struct ResetResult {
    TestStatistic f;
    std::vector<int> powers;
};

/// Ramsey RESET: F test that powers of the fitted values add nothing.
inline ResetResult ramsey_reset(const OlsFit& f, std::vector<int> powers = {2}) {
    if (powers.empty()) throw InvalidParameter("RESET needs at least one power");
    std::sort(powers.begin(), powers.end());
    powers.erase(std::unique(powers.begin(), powers.end()), powers.end());
    for (int p : powers)
        if (p < 2) throw InvalidParameter("RESET powers must be >= 2");
    const std::size_t q = powers.size();
    if (f.n <= f.k + q) throw SampleTooSmall("RESET needs n > k + number of powers");

    ResetResult out;
    out.powers = powers;
    const double df1 = static_cast<double>(q);
    const double df2 = static_cast<double>(f.n - f.k - q);
    if (detail::exact_fit(f)) {
        // Nothing left to explain.
        out.f = {0.0, 1.0};
        return out;
    }

    Matrix aug = f.frame.x;
    for (int p : powers) {
        Vector col(f.n);
        double scale = 0.0;
        for (std::size_t i = 0; i < f.n; ++i) {
            col[i] = std::pow(f.fitted[i], p);
            scale = std::max(scale, std::abs(col[i]));
        }
        // Column scaling leaves the F statistic unchanged and keeps the rank test meaningful.
        if (scale > 0.0)
            for (auto& v : col) v /= scale;
        aug = aug.with_column(col);
    }
    LstSqSolution sol;
    try {
        sol = solve_least_squares(aug, f.frame.y);
    } catch (const RankDeficient&) {
        throw CollinearAugmentation("fitted-value powers are collinear with the design");
    }
    double sse_u = 0.0;
    for (double e : sol.residuals) sse_u += e * e;
    const double stat = std::max(0.0, (f.sse - sse_u) / df1) / (sse_u / df2);
    out.f = {stat, FisherF(df1, df2).sf(stat)};
    return out;
}

/// Jarque-Bera with moment-based skewness and raw kurtosis.
inline TestStatistic jarque_bera(std::span<const double> residuals) {
    if (residuals.size() < 2) throw SampleTooSmall("Jarque-Bera needs at least two residuals");
    const auto m = detail::central_moments(residuals);
    const double skew = m.m3 / std::pow(m.m2, 1.5);
    const double kurt = m.m4 / (m.m2 * m.m2);
    const double n = static_cast<double>(residuals.size());
    const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    return {jb, ChiSquared(2.0).sf(jb)};
}

/// D'Agostino skewness z-score.
inline double skewness_z(std::span<const double> e) {
    const double n = static_cast<double>(e.size());
    if (e.size() < 8) throw SampleTooSmall("skewness test needs at least 8 observations");
    const auto m = detail::central_moments(e);
    const double b2 = m.m3 / std::pow(m.m2, 1.5);
    const double y = b2 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                         ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
    const double alpha = std::sqrt(2.0 / (w2 - 1.0));
    const double r = y / alpha;
    return delta * std::log(r + std::sqrt(r * r + 1.0));
}

/// Anscombe-Glynn kurtosis z-score.
inline double kurtosis_z(std::span<const double> e) {
    const double n = static_cast<double>(e.size());
    if (e.size() < 8) throw SampleTooSmall("kurtosis test needs at least 8 observations");
    const auto m = detail::central_moments(e);
    const double b2 = m.m4 / (m.m2 * m.m2);
    const double mean_b2 = 3.0 * (n - 1.0) / (n + 1.0);
    const double var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    const double x = (b2 - mean_b2) / std::sqrt(var_b2);
    const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                              std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
    const double term1 = 1.0 - 2.0 / (9.0 * a);
    const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
    if (denom == 0.0) throw DegenerateResiduals("kurtosis transform undefined");
    const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::abs(denom)), denom);
    return (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
}

/// D'Agostino-Pearson omnibus K^2 = z_skew^2 + z_kurt^2 ~ chi2(2).
inline TestStatistic omnibus(std::span<const double> residuals) {
    if (residuals.size() < 8) throw SampleTooSmall("omnibus test needs at least 8 observations");
    const double zs = skewness_z(residuals);
    const double zk = kurtosis_z(residuals);
    const double k2 = zs * zs + zk * zk;
    return {k2, ChiSquared(2.0).sf(k2)};
}

// ---------------------------------------------------------------------------

/// One row of the battery: a result or the reason it could not be computed.
struct DiagnosticEntry {
    std::optional<TestStatistic> result;
    std::string error;

    bool ok() const noexcept { return result.has_value(); }
};

struct DiagnosticsReport {
    DiagnosticEntry condition_number;
    DiagnosticEntry bp_lm;
    DiagnosticEntry bp_f;
    DiagnosticEntry durbin_watson;
    DiagnosticEntry reset;
    std::vector<int> reset_powers;
    DiagnosticEntry jarque_bera;
    DiagnosticEntry omnibus;
};

namespace detail {

template <typename F>
DiagnosticEntry capture(F&& compute) {
    try {
        return {compute(), {}};
    } catch (const DegenerateResiduals& e) {
        return {std::nullopt, std::string("DegenerateResiduals: ") + e.what()};
    } catch (const Error& e) {
        return {std::nullopt, e.what()};
    }
}

} // namespace detail

/// Runs the whole battery. Individual failures are recorded per entry.
inline DiagnosticsReport run_all(const OlsFit& f, const std::vector<int>& reset_powers = {2}) {
    DiagnosticsReport rep;
    rep.reset_powers = reset_powers;
    const bool exact = detail::exact_fit(f);
    auto residual_test = [&](auto&& compute) {
        if (exact) return DiagnosticEntry{std::nullopt, "DegenerateResiduals: residuals are numerically zero"};
        return detail::capture(compute);
    };

    rep.condition_number = detail::capture([&] { return TestStatistic{condition_number(f.frame.x), std::nullopt}; });
    std::optional<BreuschPagan> bp;
    rep.bp_lm = residual_test([&] {
        bp = breusch_pagan(f);
        return bp->lm;
    });
    rep.bp_f = bp ? DiagnosticEntry{bp->f, {}} : DiagnosticEntry{std::nullopt, rep.bp_lm.error};
    rep.durbin_watson = residual_test([&] { return TestStatistic{durbin_watson(f.residuals), std::nullopt}; });
    rep.reset = residual_test([&] {
        auto r = ramsey_reset(f, reset_powers);
        rep.reset_powers = r.powers;
        return r.f;
    });
    rep.jarque_bera = residual_test([&] { return jarque_bera(f.residuals); });
    rep.omnibus = residual_test([&] { return omnibus(f.residuals); });
    return rep;
}

} // namespace scalelab
