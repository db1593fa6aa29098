#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scalelab/bootstrap.hpp"
#include "scalelab/dataset.hpp"
#include "scalelab/errors.hpp"
#include "scalelab/ols.hpp"
#include "scalelab/pareto.hpp"

namespace scalelab {

// ---------------------------------------------------------------------------
// Compute law: y = alpha0 * C^alpha1, fitted on the Pareto frontier.

struct ComputeLawFit {
    SplitId split;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double r2 = 0.0;
    std::vector<CostLossPoint> frontier; ///< ascending cost
    OlsFit underlying;                   ///< log10 y on [1, log10 C]

    double predict(double cost) const { return alpha0 * std::pow(cost, alpha1); }
};

/// (C, y) for every run carrying `split`; source_run indexes runs.records.
inline std::vector<CostLossPoint> cost_loss_points(const RunDataset& runs, const SplitId& split) {
    std::vector<CostLossPoint> pts;
    for (std::size_t i = 0; i < runs.records.size(); ++i) {
        const auto loss = runs.records[i].loss(split);
        if (!loss) continue;
        pts.push_back({total_compute(runs.records[i]), *loss, i});
    }
    return pts;
}

/// Fits log10 y = log10 alpha0 + alpha1 log10 C over the frontier of `points`.
inline ComputeLawFit fit_compute_law(const std::vector<CostLossPoint>& points, SplitId split = {}) {
    if (points.empty()) throw InsufficientFrontier("no (cost, loss) points");
    ComputeLawFit out;
    out.split = std::move(split);
    out.frontier = pareto_frontier(points);
    // n > k is required for a residual variance; a 2-point frontier is an exact line.
    if (out.frontier.size() < 3)
        throw InsufficientFrontier("compute-law fit needs at least 3 frontier points, got " +
                                   std::to_string(out.frontier.size()));
    Matrix cost(out.frontier.size(), 1);
    Vector loss(out.frontier.size());
    for (std::size_t i = 0; i < out.frontier.size(); ++i) {
        cost(i, 0) = out.frontier[i].cost;
        loss[i] = out.frontier[i].loss;
    }
    out.underlying = fit(make_log10_frame(cost, loss, {"compute"}));
    out.alpha0 = std::pow(10.0, out.underlying.coefficients[0]);
    out.alpha1 = out.underlying.coefficients[1];
    out.r2 = out.underlying.r2;
    return out;
}

inline ComputeLawFit fit_compute_law(const RunDataset& runs, const SplitId& split) {
    return fit_compute_law(cost_loss_points(runs, split), split);
}

// ---------------------------------------------------------------------------
// Scaling law: y = beta0 * P^beta1 * S^beta2 * T^beta3.

inline const std::vector<std::string>& scaling_law_predictors() {
    static const std::vector<std::string> names = {"params", "samples", "initial_loss"};
    return names;
}

/// Unstandardized frame log10 y ~ [1, log10 P, log10 S, log10 T] for runs
/// carrying `split`, in dataset order.
inline RegressionFrame scaling_law_frame(const RunDataset& runs, const SplitId& split) {
    const RunDataset sub = runs.with_split(split);
    Matrix pred(sub.size(), 3);
    Vector y(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
        const auto& r = sub.records[i];
        pred(i, 0) = r.total_params;
        pred(i, 1) = static_cast<double>(r.seen_samples);
        pred(i, 2) = r.initial_loss;
        y[i] = *r.loss(split);
    }
    return make_log10_frame(pred, y, scaling_law_predictors());
}

struct ScalingLawFit {
    SplitId split;
    Standardization mode = Standardization::per_task;
    double beta0 = 0.0; ///< multiplicative constant (10^intercept of the raw fit)
    double beta1 = 0.0; ///< exponent of P
    double beta2 = 0.0; ///< exponent of S
    double beta3 = 0.0; ///< exponent of T
    Vector standardized_betas; ///< (beta1, beta2, beta3) of the standardized fit
    OlsFit raw;
    OlsFit standardized;

    /// Fit used for coefficient tables: the standardized one unless mode is none.
    const OlsFit& reporting_fit() const { return mode == Standardization::none ? raw : standardized; }
};

inline ScalingLawFit fit_scaling_law(const RunDataset& runs, const SplitId& split,
                                     Standardization mode = Standardization::per_task) {
    const RegressionFrame raw_frame = scaling_law_frame(runs, split);
    if (raw_frame.n() < 5) throw InsufficientPoints("scaling-law fit needs at least 5 runs for split " + split);

    ScalingLawFit out;
    out.split = split;
    out.mode = mode;
    out.raw = fit(raw_frame);
    out.beta0 = std::pow(10.0, out.raw.coefficients[0]);
    out.beta1 = out.raw.coefficients[1];
    out.beta2 = out.raw.coefficients[2];
    out.beta3 = out.raw.coefficients[3];

    std::vector<RegressionFrame> siblings;
    if (mode == Standardization::pooled) {
        for (const auto& s : runs.splits())
            if (s != split) siblings.push_back(scaling_law_frame(runs, s));
    }
    const Standardization z_mode = mode == Standardization::none ? Standardization::per_task : mode;
    out.standardized = fit(standardize(raw_frame, z_mode, siblings));
    out.standardized_betas.assign(out.standardized.coefficients.begin() + 1, out.standardized.coefficients.end());
    return out;
}

/// A prediction mapped back to loss space.
struct LossPrediction {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    IntervalEstimate log_space; ///< log10 loss
    double params = 0.0;
    double samples = 0.0;
    double initial_loss = 0.0;
    double leverage = 0.0;
    bool extrapolation_warning = false;
};

/// Point prediction and prediction interval for a new configuration.
/// The point is the plain back-transform 10^(log10 prediction).
inline LossPrediction extrapolate(const ScalingLawFit& law, double params, double samples, double initial_loss,
                                  double level = 0.95) {
    if (!(params > 0.0) || !(samples > 0.0) || !(initial_loss > 0.0))
        throw NonPositiveValue("P, S and T must be positive");
    const double raw[] = {params, samples, initial_loss};
    const PredictionInterval pi = predict_interval(law.raw, raw, level);
    LossPrediction out;
    out.log_space = pi.log10;
    out.point = std::pow(10.0, pi.log10.point);
    out.lower = std::pow(10.0, pi.log10.lower);
    out.upper = std::pow(10.0, pi.log10.upper);
    out.params = params;
    out.samples = samples;
    out.initial_loss = initial_loss;
    out.leverage = pi.leverage;
    out.extrapolation_warning = pi.extrapolation_warning;
    return out;
}

enum class SweepVariable { params, samples };

struct CurvePoint {
    double x = 0.0;
    double y_pred = 0.0;
    double pi_lower = 0.0;
    double pi_upper = 0.0;
};

/// Log-uniform sweep of P (with S, T fixed) or S (with P, T fixed).
/// `fixed_other` is S when sweeping P and P when sweeping S.
inline std::vector<CurvePoint> predict_curve(const ScalingLawFit& law, SweepVariable var, double fixed_other,
                                             double initial_loss, double from, double to, std::size_t count,
                                             double level = 0.95) {
    if (!(from > 0.0) || !(to > 0.0) || !std::isfinite(from) || !std::isfinite(to))
        throw InvalidRange("sweep bounds must be positive");
    if (count < 2) throw InvalidRange("sweep needs at least 2 samples");
    const double lo = std::log10(from);
    const double hi = std::log10(to);
    std::vector<CurvePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        const double x = i == 0 ? from : i + 1 == count ? to : std::pow(10.0, lo + t * (hi - lo));
        const LossPrediction p = var == SweepVariable::params ? extrapolate(law, x, fixed_other, initial_loss, level)
                                                              : extrapolate(law, fixed_other, x, initial_loss, level);
        out.push_back({x, p.point, p.lower, p.upper});
    }
    return out;
}

inline std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out << "x,y_pred,pi_lower,pi_upper\n";
    for (const auto& p : curve)
        out << io::format_double(p.x) << ',' << io::format_double(p.y_pred) << ',' << io::format_double(p.pi_lower)
            << ',' << io::format_double(p.pi_upper) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Summaries consumed by the report renderer.

struct CoefficientSummary {
    SplitId split;
    std::size_t index = 0; ///< 1..3
    std::string name;      ///< predictor name
    Inference ols;
    Inference hc3;
    std::optional<IntervalEstimate> bootstrap;
};

inline std::vector<CoefficientSummary> summarize_coefficients(const ScalingLawFit& law,
                                                              const std::optional<BootstrapOptions>& boot = {},
                                                              double level = 0.95) {
    const OlsFit& f = law.reporting_fit();
    std::optional<BootstrapDraws> draws;
    if (boot) draws = bootstrap_coefficients(f.frame, *boot);
    std::vector<CoefficientSummary> out;
    for (std::size_t j = 1; j < f.k; ++j) {
        CoefficientSummary s;
        s.split = law.split;
        s.index = j;
        s.name = f.frame.column_names[j];
        s.ols = coefficient_inference(f, j, IntervalMethod::classic_t, level);
        s.hc3 = coefficient_inference(f, j, IntervalMethod::hc3_z, level);
        if (draws) {
            Vector w(f.k, 0.0);
            w[j] = 1.0;
            s.bootstrap = percentile_interval(*draws, w, f.coefficients[j], level);
        }
        out.push_back(std::move(s));
    }
    return out;
}

struct FitMetrics {
    SplitId split;
    std::size_t n = 0;
    double r2 = 0.0;
    double r2_adj = 0.0;
    double r2_loocv = 0.0;
};

inline FitMetrics fit_metrics(const ScalingLawFit& law) {
    const OlsFit& f = law.reporting_fit();
    return {law.split, f.n, f.r2, f.r2_adj, f.r2_loocv};
}

} // namespace scalelab
