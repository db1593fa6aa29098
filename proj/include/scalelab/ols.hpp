#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <limits>
#include <string_view>
#include <vector>

#include "scalelab/errors.hpp"
#include "scalelab/numerics/distributions.hpp"
#include "scalelab/numerics/linalg.hpp"
#include "scalelab/numerics/matrix.hpp"

namespace scalelab {

enum class Standardization { none, pooled, per_task };

inline const char* to_string(Standardization s) {
    switch (s) {
    case Standardization::none: return "none";
    case Standardization::pooled: return "pooled";
    case Standardization::per_task: return "per_task";
    }
    return "?";
}

/// Affine column transform z = (v - mean) / sd.
struct ColumnScaling {
    double mean = 0.0;
    double sd = 1.0;

    double apply(double v) const { return (v - mean) / sd; }
    double invert(double z) const { return z * sd + mean; }

    friend bool operator==(const ColumnScaling&, const ColumnScaling&) = default;
};

/// Design matrix and response, with everything needed to map raw predictor
/// values into the fitted space. Column 0 is always the intercept.
struct RegressionFrame {
    Matrix x;
    Vector y;
    std::vector<std::string> column_names; ///< column_names[0] == "intercept"
    Standardization standardization = Standardization::none;
    std::vector<ColumnScaling> predictor_scaling; ///< one per non-intercept column
    ColumnScaling response_scaling;
    bool log10_predictors = true; ///< raw predictors were log10-transformed before scaling
    bool log10_response = true;

    std::size_t n() const noexcept { return x.rows(); }
    std::size_t k() const noexcept { return x.cols(); }

    /// Design row (with intercept) for raw predictor values.
    Vector design_row(std::span<const double> raw_predictors) const {
        if (raw_predictors.size() + 1 != k())
            throw DimensionMismatch("expected " + std::to_string(k() - 1) + " predictor values");
        Vector row(k());
        row[0] = 1.0;
        for (std::size_t j = 0; j + 1 < k(); ++j) {
            double v = raw_predictors[j];
            if (log10_predictors) {
                if (!(v > 0.0)) throw NonPositiveValue("predictor '" + column_names[j + 1] + "' must be positive");
                v = std::log10(v);
            }
            row[j + 1] = predictor_scaling[j].apply(v);
        }
        return row;
    }

    /// Maps a value in the fitted response space back to (log10) response units.
    double unscale_response(double z) const { return response_scaling.invert(z); }
};

namespace detail {

inline void check_frame(const RegressionFrame& f) {
    if (f.x.cols() < 1) throw DimensionMismatch("design matrix has no columns");
    if (f.y.size() != f.x.rows()) throw DimensionMismatch("response length != design rows");
    if (f.column_names.size() != f.x.cols()) throw DimensionMismatch("column name count != design columns");
    if (f.predictor_scaling.size() + 1 != f.x.cols())
        throw DimensionMismatch("predictor scaling count != non-intercept columns");
    for (std::size_t i = 0; i < f.x.rows(); ++i)
        if (f.x(i, 0) != 1.0) throw InvalidParameter("first design column must be the all-ones intercept");
    for (std::size_t j = 1; j < f.x.cols(); ++j) {
        bool all_one = true;
        for (std::size_t i = 0; i < f.x.rows() && all_one; ++i) all_one = f.x(i, j) == 1.0;
        if (all_one && f.x.rows() > 0) throw InvalidParameter("intercept column appears more than once");
    }
}

inline ColumnScaling sample_scaling(std::span<const double> v, const std::string& name) {
    const double n = static_cast<double>(v.size());
    if (v.size() < 2) throw ZeroVariance(name);
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= n;
    double ss = 0.0;
    for (double e : v) ss += (e - mean) * (e - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) throw ZeroVariance(name);
    return {mean, sd};
}

} // namespace detail

/// Builds an unstandardized frame: y = log10(response), X = [1, log10(predictors)].
/// `predictors` holds one row per observation, without intercept.
inline RegressionFrame make_log10_frame(const Matrix& predictors, std::span<const double> response,
                                        std::vector<std::string> predictor_names) {
    if (predictors.rows() != response.size()) throw DimensionMismatch("predictor rows != response length");
    if (predictor_names.size() != predictors.cols()) throw DimensionMismatch("predictor name count mismatch");
    RegressionFrame f;
    f.x = Matrix(predictors.rows(), predictors.cols() + 1);
    f.y.resize(response.size());
    f.column_names.push_back("intercept");
    for (auto& name : predictor_names) f.column_names.push_back(std::move(name));
    f.predictor_scaling.assign(predictors.cols(), ColumnScaling{});
    for (std::size_t i = 0; i < predictors.rows(); ++i) {
        f.x(i, 0) = 1.0;
        for (std::size_t j = 0; j < predictors.cols(); ++j) {
            const double v = predictors(i, j);
            if (!(v > 0.0) || !std::isfinite(v))
                throw NonPositiveValue("predictor '" + f.column_names[j + 1] + "' must be positive for log10");
            f.x(i, j + 1) = std::log10(v);
        }
        if (!(response[i] > 0.0) || !std::isfinite(response[i]))
            throw NonPositiveValue("response must be positive for log10");
        f.y[i] = std::log10(response[i]);
    }
    detail::check_frame(f);
    return f;
}

/// Z-scores the non-intercept columns and the response (sample sd, n - 1).
///
/// per_task uses only this frame's rows. pooled computes the statistics over
/// the concatenation of this frame and `siblings`, which must share this
/// frame's design rows exactly.
inline RegressionFrame standardize(const RegressionFrame& frame, Standardization mode,
                                   std::span<const RegressionFrame> siblings = {}) {
    detail::check_frame(frame);
    if (frame.standardization != Standardization::none)
        throw InvalidParameter("frame is already standardized");
    if (mode == Standardization::none) return frame;

    std::vector<const RegressionFrame*> pool{&frame};
    if (mode == Standardization::pooled) {
        for (const auto& s : siblings) {
            if (!(s.x == frame.x)) throw InvalidParameter("pooled standardization requires identical design rows");
            pool.push_back(&s);
        }
    }

    RegressionFrame out = frame;
    out.standardization = mode;
    for (std::size_t j = 1; j < frame.k(); ++j) {
        Vector col;
        for (const auto* f : pool)
            for (std::size_t i = 0; i < f->n(); ++i) col.push_back(f->x(i, j));
        const ColumnScaling sc = detail::sample_scaling(col, frame.column_names[j]);
        out.predictor_scaling[j - 1] = sc;
        for (std::size_t i = 0; i < frame.n(); ++i) out.x(i, j) = sc.apply(frame.x(i, j));
    }
    Vector resp;
    for (const auto* f : pool) resp.insert(resp.end(), f->y.begin(), f->y.end());
    // fixed summation order: every split of a pool gets bit-identical statistics
    if (pool.size() > 1) std::sort(resp.begin(), resp.end());
    out.response_scaling = detail::sample_scaling(resp, "response");
    for (auto& v : out.y) v = out.response_scaling.apply(v);
    return out;
}

// ---------------------------------------------------------------------------

/// Estimates, covariances, residual quantities and the R^2 family.
struct OlsFit {
    RegressionFrame frame;
    Vector coefficients;
    Matrix xtx_inverse;
    Matrix cov_classic; ///< sigma2 (X'X)^-1
    Matrix cov_hc3;     ///< (X'X)^-1 X' diag(e^2 / (1 - h)^2) X (X'X)^-1
    Vector residuals;
    Vector fitted;
    Vector hat_diagonals;
    std::size_t n = 0;
    std::size_t k = 0;
    double sse = 0.0;
    double sst = 0.0;
    double press = 0.0;
    double sigma2 = 0.0; ///< SSE / (n - k)
    double r2 = 0.0;
    double r2_adj = 0.0;
    double r2_loocv = 0.0; ///< 1 - PRESS / SST

    std::size_t df_resid() const noexcept { return n - k; }
};

inline OlsFit fit(const RegressionFrame& frame) {
    detail::check_frame(frame);
    const std::size_t n = frame.n();
    const std::size_t k = frame.k();
    if (n <= k) throw DimensionMismatch("OLS needs more observations than coefficients");

    const LstSqSolution sol = solve_least_squares(frame.x, frame.y);

    OlsFit f;
    f.frame = frame;
    f.n = n;
    f.k = k;
    f.coefficients = sol.coefficients;
    f.xtx_inverse = sol.xtx_inverse;
    f.residuals = sol.residuals;
    f.hat_diagonals = sol.hat_diagonals;
    f.fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.fitted[i] = frame.y[i] - sol.residuals[i];

    double mean = 0.0;
    for (double v : frame.y) mean += v;
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.sst += (frame.y[i] - mean) * (frame.y[i] - mean);
        f.sse += sol.residuals[i] * sol.residuals[i];
    }
    if (!(f.sst > 0.0)) throw DegenerateVariance("response has zero total variance");

    // A point with leverage 1 fixes its own fitted value; its leave-one-out
    // residual is undefined and it contributes nothing to PRESS or HC3.
    Vector hc3_weight(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double one_minus_h = 1.0 - sol.hat_diagonals[i];
        if (one_minus_h <= 1e-12) continue;
        const double loo = sol.residuals[i] / one_minus_h;
        f.press += loo * loo;
        hc3_weight[i] = loo * loo;
    }

    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    f.sigma2 = f.sse / (dn - dk);
    f.r2 = 1.0 - f.sse / f.sst;
    f.r2_adj = 1.0 - (1.0 - f.r2) * (dn - 1.0) / (dn - dk);
    f.r2_loocv = 1.0 - f.press / f.sst;

    f.cov_classic = Matrix(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) f.cov_classic(i, j) = f.sigma2 * sol.xtx_inverse(i, j);

    // meat = X' diag(w) X
    Matrix meat(k, k);
    for (std::size_t r = 0; r < n; ++r) {
        if (hc3_weight[r] == 0.0) continue;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) meat(i, j) += hc3_weight[r] * frame.x(r, i) * frame.x(r, j);
    }
    f.cov_hc3 = sol.xtx_inverse * meat * sol.xtx_inverse;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double s = 0.5 * (f.cov_hc3(i, j) + f.cov_hc3(j, i));
            f.cov_hc3(i, j) = f.cov_hc3(j, i) = s;
        }
    return f;
}

// ---------------------------------------------------------------------------
// Inference

/// hc3_z uses normal critical values and p-values (the usual large-sample
/// convention for robust covariances); hc3_t uses student_t(n - k).
enum class IntervalMethod { classic_t, hc3_t, hc3_z, bootstrap_percentile };

inline const char* to_string(IntervalMethod m) {
    switch (m) {
    case IntervalMethod::classic_t: return "classic_t";
    case IntervalMethod::hc3_t: return "hc3_t";
    case IntervalMethod::hc3_z: return "hc3_z";
    case IntervalMethod::bootstrap_percentile: return "bootstrap_percentile";
    }
    return "?";
}

struct IntervalEstimate {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    IntervalMethod method = IntervalMethod::classic_t;
};

/// A linear combination of coefficients with its t-based inference.
struct Inference {
    IntervalEstimate interval;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0; ///< two-sided, student_t(n - k)
};

namespace detail {

inline void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("confidence level must be in (0, 1)");
}

} // namespace detail

/// Inference for w' beta using the classic or HC3 covariance.
inline Inference contrast(const OlsFit& f, std::span<const double> weights,
                          IntervalMethod method = IntervalMethod::classic_t, double level = 0.95) {
    if (weights.size() != f.k) throw DimensionMismatch("contrast weights length != number of coefficients");
    if (method == IntervalMethod::bootstrap_percentile)
        throw InvalidParameter("bootstrap intervals come from bootstrap_ci");
    detail::check_level(level);
    const bool robust = method == IntervalMethod::hc3_t || method == IntervalMethod::hc3_z;
    const Matrix& cov = robust ? f.cov_hc3 : f.cov_classic;

    Inference out;
    out.interval.method = method;
    out.interval.level = level;
    out.interval.point = dot(weights, f.coefficients);
    const double var = quadratic_form(cov, weights);
    out.std_error = std::sqrt(std::max(var, 0.0));

    const StudentT t(static_cast<double>(f.df_resid()));
    const bool normal = method == IntervalMethod::hc3_z;
    const double crit = normal ? Normal{}.quantile(0.5 * (1.0 + level)) : t.quantile(0.5 * (1.0 + level));
    out.interval.lower = out.interval.point - crit * out.std_error;
    out.interval.upper = out.interval.point + crit * out.std_error;
    if (out.std_error > 0.0) {
        out.t_stat = out.interval.point / out.std_error;
        out.p_value = normal ? 2.0 * Normal{}.sf(std::abs(out.t_stat)) : t.two_sided_p(out.t_stat);
    } else {
        out.t_stat = out.interval.point == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), out.interval.point);
        out.p_value = out.interval.point == 0.0 ? 1.0 : 0.0;
    }
    return out;
}

/// Inference for a single coefficient.
inline Inference coefficient_inference(const OlsFit& f, std::size_t column,
                                       IntervalMethod method = IntervalMethod::classic_t, double level = 0.95) {
    if (column >= f.k) throw InvalidColumn("coefficient index " + std::to_string(column) + " out of range");
    Vector w(f.k, 0.0);
    w[column] = 1.0;
    return contrast(f, w, method, level);
}

/// Parses a linear combination of coefficients such as "b1-b2", "b3 + b2" or
/// "0.5*b1 - 2*b3" into a weight vector of length k (b0 is the intercept).
inline Vector parse_contrast(std::string_view expr, std::size_t k) {
    Vector w(k, 0.0);
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < expr.size() && (expr[i] == ' ' || expr[i] == '\t')) ++i;
    };
    auto fail = [&](const std::string& why) -> InvalidParameter {
        return InvalidParameter("bad contrast '" + std::string(expr) + "': " + why);
    };
    bool any = false;
    skip_ws();
    while (i < expr.size()) {
        double sign = 1.0;
        if (expr[i] == '+' || expr[i] == '-') {
            sign = expr[i] == '-' ? -1.0 : 1.0;
            ++i;
            skip_ws();
        } else if (any) {
            throw fail("expected '+' or '-'");
        }
        double coef = 1.0;
        if (i < expr.size() && (std::isdigit(static_cast<unsigned char>(expr[i])) || expr[i] == '.')) {
            std::size_t j = i;
            while (j < expr.size() && (std::isdigit(static_cast<unsigned char>(expr[j])) || expr[j] == '.' ||
                                       expr[j] == 'e' || expr[j] == 'E'))
                ++j;
            try {
                coef = std::stod(std::string(expr.substr(i, j - i)));
            } catch (const std::exception&) {
                throw fail("bad number");
            }
            i = j;
            skip_ws();
            if (i < expr.size() && expr[i] == '*') ++i;
            skip_ws();
        }
        if (i >= expr.size() || (expr[i] != 'b' && expr[i] != 'B')) throw fail("expected a coefficient like b1");
        ++i;
        std::size_t j = i;
        while (j < expr.size() && std::isdigit(static_cast<unsigned char>(expr[j]))) ++j;
        if (j == i) throw fail("missing coefficient index");
        const std::size_t idx = std::stoul(std::string(expr.substr(i, j - i)));
        if (idx >= k) throw InvalidColumn("coefficient b" + std::to_string(idx) + " does not exist");
        w[idx] += sign * coef;
        i = j;
        any = true;
        skip_ws();
    }
    if (!any) throw fail("empty expression");
    return w;
}

/// Prediction interval for a new observation, reported in log10 response units.
struct PredictionInterval {
    IntervalEstimate log10;
    double leverage = 0.0; ///< x0' (X'X)^-1 x0
    bool extrapolation_warning = false;
};

/// Prediction interval at a design row already in the fit's space.
inline PredictionInterval predict_interval_at(const OlsFit& f, std::span<const double> row, double level = 0.95) {
    if (row.size() != f.k) throw DimensionMismatch("design row length != number of coefficients");
    detail::check_level(level);
    PredictionInterval out;
    out.leverage = quadratic_form(f.xtx_inverse, row);
    const double max_h = *std::max_element(f.hat_diagonals.begin(), f.hat_diagonals.end());
    out.extrapolation_warning = out.leverage > max_h * (1.0 + 1e-9);

    const double point = dot(row, f.coefficients);
    const double se = std::sqrt(f.sigma2 * (1.0 + out.leverage));
    const double crit = StudentT(static_cast<double>(f.df_resid())).quantile(0.5 * (1.0 + level));
    const auto& fr = f.frame;
    out.log10.method = IntervalMethod::classic_t;
    out.log10.level = level;
    out.log10.point = fr.unscale_response(point);
    out.log10.lower = fr.unscale_response(point - crit * se);
    out.log10.upper = fr.unscale_response(point + crit * se);
    return out;
}

/// Prediction interval for raw predictor values (e.g. P, S, T), mapped through
/// the frame's stored log10 and standardization transforms.
inline PredictionInterval predict_interval(const OlsFit& f, std::span<const double> raw_predictors,
                                           double level = 0.95) {
    const Vector row = f.frame.design_row(raw_predictors);
    return predict_interval_at(f, row, level);
}

} // namespace scalelab
