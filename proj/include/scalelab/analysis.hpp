#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scalelab/bootstrap.hpp"
#include "scalelab/dataset.hpp"
#include "scalelab/diagnostics.hpp"
#include "scalelab/powerlaw.hpp"
#include "scalelab/report.hpp"

namespace scalelab {

/// Splits in reporting order.
inline std::vector<SplitId> reporting_splits(const RunDataset& runs) {
    std::vector<SplitId> out;
    for (const auto& s : {splits::seen_captioning, splits::seen_translation, splits::unseen_captioning})
        if (!runs.with_split(s).records.empty()) out.push_back(s);
    for (const auto& s : runs.splits())
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    return out;
}

struct AnalysisOptions {
    Standardization standardization = Standardization::per_task;
    std::vector<int> reset_powers = {2};
    std::optional<BootstrapOptions> bootstrap = BootstrapOptions{};
    double level = 0.95;
    std::string data_source = "reference";
};

inline ReportConfig report_config(const AnalysisOptions& opt) {
    ReportConfig cfg;
    cfg.standardization = opt.standardization;
    cfg.reset_powers = opt.reset_powers;
    cfg.data_source = opt.data_source;
    if (opt.bootstrap) {
        cfg.seed = opt.bootstrap->seed;
        cfg.replicates = opt.bootstrap->replicates;
    }
    return cfg;
}

/// Scaling-law fits for every reporting split.
inline std::vector<ScalingLawFit> fit_all(const RunDataset& runs, Standardization mode) {
    std::vector<ScalingLawFit> out;
    for (const auto& s : reporting_splits(runs)) out.push_back(fit_scaling_law(runs, s, mode));
    return out;
}

/// Coefficient table, diagnostics, extended coefficient table and fit metrics.
inline ReportDocument full_report(const RunDataset& runs, const AnalysisOptions& opt, ReportFormat format) {
    const auto laws = fit_all(runs, opt.standardization);
    std::vector<CoefficientSummary> coefs;
    std::vector<std::pair<SplitId, DiagnosticsReport>> diags;
    std::vector<FitMetrics> metrics;
    for (const auto& law : laws) {
        auto rows = summarize_coefficients(law, opt.bootstrap, opt.level);
        coefs.insert(coefs.end(), rows.begin(), rows.end());
        diags.emplace_back(law.split, run_all(law.reporting_fit(), opt.reset_powers));
        metrics.push_back(fit_metrics(law));
    }
    const Metadata meta = make_metadata(report_config(opt));
    std::vector<ReportDocument> parts;
    parts.push_back(render_coefficients(coefs, {}, format, {}));
    parts.push_back(render_diagnostics(diags, format, {}));
    parts.push_back(render_coefficients(coefs, {true, opt.bootstrap.has_value()}, format, {}));
    parts.push_back(render_fit_metrics(metrics, format, {}));
    return merge(parts, meta, format);
}

} // namespace scalelab
