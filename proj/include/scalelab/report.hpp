#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scalelab/diagnostics.hpp"
#include "scalelab/errors.hpp"
#include "scalelab/ols.hpp"
#include "scalelab/powerlaw.hpp"
#include "scalelab/trends.hpp"
#include "scalelab/version.hpp"

namespace scalelab {

enum class ReportFormat { markdown, json, csv };

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw InvalidParameter("unknown report format '" + s + "'");
}

/// A titled table of preformatted cells.
struct ReportSection {
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;

    friend bool operator==(const ReportSection&, const ReportSection&) = default;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct ReportDocument {
    std::vector<ReportSection> sections;
    Metadata metadata;
    ReportFormat format = ReportFormat::markdown;

    friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

/// Configuration recorded with every rendered document.
struct ReportConfig {
    Standardization standardization = Standardization::per_task;
    std::vector<int> reset_powers = {2};
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::string data_source;
    Metadata extra;
};

inline Metadata make_metadata(const ReportConfig& cfg) {
    Metadata m;
    m.emplace_back("version", kVersion);
    if (!cfg.data_source.empty()) m.emplace_back("data", cfg.data_source);
    m.emplace_back("standardization", to_string(cfg.standardization));
    std::string powers;
    for (std::size_t i = 0; i < cfg.reset_powers.size(); ++i)
        powers += (i ? "," : "") + std::to_string(cfg.reset_powers[i]);
    m.emplace_back("reset_powers", powers);
    m.emplace_back("seed", cfg.seed ? std::to_string(*cfg.seed) : "none");
    if (cfg.replicates) m.emplace_back("bootstrap_replicates", std::to_string(*cfg.replicates));
    for (const auto& kv : cfg.extra) m.push_back(kv);
    return m;
}

// ---------------------------------------------------------------------------
// Number formatting

namespace fmt {

/// Fixed-point with `decimals` digits; "-0.00" is printed as "0.00".
inline std::string fixed(double v, int decimals) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    std::string s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

/// "p < 0.001" below 0.001, otherwise three decimals.
inline std::string p_value(double p) {
    if (p < 0.001) return "p < 0.001";
    return fixed(p, 3);
}

inline std::string interval(double lo, double hi, int decimals) {
    return "[" + fixed(lo, decimals) + ", " + fixed(hi, decimals) + "]";
}

} // namespace fmt

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

inline std::string render_markdown(const ReportDocument& doc) {
    std::ostringstream out;
    bool first = true;
    for (const auto& sec : doc.sections) {
        if (!first) out << '\n';
        first = false;
        out << '|';
        for (const auto& h : sec.header) out << ' ' << md_cell(h) << " |";
        out << "\n|";
        for (std::size_t i = 0; i < sec.header.size(); ++i) out << (i == 0 ? ":---|" : "---:|");
        out << '\n';
        for (const auto& row : sec.rows) {
            out << '|';
            for (const auto& c : row) out << ' ' << md_cell(c) << " |";
            out << '\n';
        }
        out << "\nTable: " << sec.title << '\n';
        for (const auto& n : sec.notes) out << "\n_" << n << "_\n";
    }
    out << "\n---\n";
    for (const auto& [k, v] : doc.metadata) out << "- " << k << ": " << v << '\n';
    return out.str();
}

inline std::string render_csv(const ReportDocument& doc) {
    std::ostringstream out;
    for (const auto& [k, v] : doc.metadata) out << "# " << k << ": " << v << '\n';
    for (const auto& sec : doc.sections) {
        out << "# section: " << sec.title << '\n';
        for (std::size_t i = 0; i < sec.header.size(); ++i) out << (i ? "," : "") << csv_cell(sec.header[i]);
        out << '\n';
        for (const auto& row : sec.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
            out << '\n';
        }
        for (const auto& n : sec.notes) out << "# note: " << n << '\n';
    }
    return out.str();
}

inline std::string render_json(const ReportDocument& doc) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : doc.metadata) meta[k] = v;
    j["metadata"] = std::move(meta);
    nlohmann::ordered_json secs = nlohmann::ordered_json::array();
    for (const auto& s : doc.sections) {
        nlohmann::ordered_json o;
        o["title"] = s.title;
        o["header"] = s.header;
        o["rows"] = s.rows;
        o["notes"] = s.notes;
        secs.push_back(std::move(o));
    }
    j["sections"] = std::move(secs);
    return j.dump(2) + "\n";
}

} // namespace detail

/// Renders the document in its own format. Output is a pure function of the document.
inline std::string render(const ReportDocument& doc) {
    switch (doc.format) {
    case ReportFormat::markdown: return detail::render_markdown(doc);
    case ReportFormat::json: return detail::render_json(doc);
    case ReportFormat::csv: return detail::render_csv(doc);
    }
    return {};
}

/// Reads a document back from its JSON rendering.
inline ReportDocument parse_report_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    ReportDocument doc;
    doc.format = ReportFormat::json;
    try {
        for (const auto& [k, v] : j.at("metadata").items()) doc.metadata.emplace_back(k, v.get<std::string>());
        for (const auto& s : j.at("sections")) {
            ReportSection sec;
            sec.title = s.at("title").get<std::string>();
            sec.header = s.at("header").get<std::vector<std::string>>();
            sec.rows = s.at("rows").get<std::vector<std::vector<std::string>>>();
            sec.notes = s.at("notes").get<std::vector<std::string>>();
            doc.sections.push_back(std::move(sec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report JSON: ") + e.what());
    }
    return doc;
}

/// Concatenates the sections of several documents under one metadata block.
inline ReportDocument merge(const std::vector<ReportDocument>& docs, Metadata metadata, ReportFormat format) {
    ReportDocument out;
    out.format = format;
    out.metadata = std::move(metadata);
    for (const auto& d : docs) out.sections.insert(out.sections.end(), d.sections.begin(), d.sections.end());
    return out;
}

// ---------------------------------------------------------------------------
// Table builders. No statistics are computed here, only formatted.

inline std::string coefficient_label(std::size_t index) { return "β" + std::to_string(index); }

struct CoefficientColumns {
    bool hc3 = false;
    bool bootstrap = false;
};

/// One row per (task, coefficient). With no extra columns this is the compact
/// "estimate [95% CI]" layout; otherwise OLS/HC3/bootstrap CIs get their own columns.
inline ReportDocument render_coefficients(const std::vector<CoefficientSummary>& rows, CoefficientColumns cols,
                                          ReportFormat format, Metadata metadata) {
    ReportSection sec;
    const bool compact = !cols.hc3 && !cols.bootstrap;
    if (compact) {
        sec.title = "Standardized coefficients of the multivariate power law (log10 space)";
        sec.header = {"Task", "Coefficient", "Estimate [95% CI]", "p-value"};
    } else {
        sec.title = "Standardized coefficients with OLS, HC3 robust and bootstrap percentile 95% CIs";
        sec.header = {"Task", "Coefficient", "Estimate", "OLS 95% CI"};
        if (cols.hc3) sec.header.push_back("HC3 95% CI");
        if (cols.bootstrap) sec.header.push_back("Bootstrap 95% CI");
        sec.header.push_back("p-value");
    }
    for (const auto& r : rows) {
        std::vector<std::string> row = {r.split, coefficient_label(r.index)};
        const auto& ci = r.ols.interval;
        if (compact) {
            row.push_back(fmt::fixed(ci.point, 2) + " " + fmt::interval(ci.lower, ci.upper, 2));
        } else {
            row.push_back(fmt::fixed(ci.point, 2));
            row.push_back(fmt::interval(ci.lower, ci.upper, 2));
            if (cols.hc3) row.push_back(fmt::interval(r.hc3.interval.lower, r.hc3.interval.upper, 2));
            if (cols.bootstrap)
                row.push_back(r.bootstrap ? fmt::interval(r.bootstrap->lower, r.bootstrap->upper, 2) : "");
        }
        row.push_back(fmt::p_value(r.ols.p_value));
        sec.rows.push_back(std::move(row));
    }
    sec.notes.push_back("β1: model parameters P, β2: seen samples S, β3: initial loss T");
    return {{std::move(sec)}, std::move(metadata), format};
}

inline std::string diagnostics_task_label(const std::string& s) { return s; }

/// Test battery per task. Markdown/JSON use the wide layout (one row per test,
/// statistic and p-value columns per task); CSV is long: test,task,quantity,value.
inline ReportDocument render_diagnostics(const std::vector<std::pair<SplitId, DiagnosticsReport>>& reports,
                                         ReportFormat format, Metadata metadata) {
    struct Row {
        const char* name;
        const DiagnosticEntry DiagnosticsReport::*entry;
    };
    static const Row tests[] = {
        {"Condition Number", &DiagnosticsReport::condition_number},
        {"Breusch-Pagan (LM)", &DiagnosticsReport::bp_lm},
        {"Breusch-Pagan (F)", &DiagnosticsReport::bp_f},
        {"Durbin-Watson", &DiagnosticsReport::durbin_watson},
        {"Ramsey RESET", &DiagnosticsReport::reset},
        {"Jarque-Bera", &DiagnosticsReport::jarque_bera},
        {"Omnibus", &DiagnosticsReport::omnibus},
    };
    ReportSection sec;
    sec.title = "OLS diagnostic tests for the multivariate power law";
    if (format == ReportFormat::csv) {
        sec.header = {"test", "task", "quantity", "value"};
        for (const auto& t : tests)
            for (const auto& [split, rep] : reports) {
                const DiagnosticEntry& e = rep.*(t.entry);
                if (!e.ok()) {
                    sec.rows.push_back({t.name, split, "error", e.error});
                    continue;
                }
                sec.rows.push_back({t.name, split, "statistic", fmt::fixed(e.result->statistic, 3)});
                if (e.result->p_value) sec.rows.push_back({t.name, split, "p", fmt::fixed(*e.result->p_value, 3)});
            }
    } else {
        sec.header = {"Test"};
        for (const auto& [split, rep] : reports) {
            sec.header.push_back(split + " statistic");
            sec.header.push_back(split + " p-value");
        }
        for (const auto& t : tests) {
            std::vector<std::string> row = {t.name};
            for (const auto& [split, rep] : reports) {
                const DiagnosticEntry& e = rep.*(t.entry);
                if (!e.ok()) {
                    row.push_back("error");
                    row.push_back("");
                    sec.notes.push_back(split + " " + t.name + ": " + e.error);
                    continue;
                }
                row.push_back(fmt::fixed(e.result->statistic, 3));
                row.push_back(e.result->p_value ? fmt::fixed(*e.result->p_value, 3) : "");
            }
            sec.rows.push_back(std::move(row));
        }
    }
    if (!reports.empty()) {
        std::string powers;
        for (std::size_t i = 0; i < reports.front().second.reset_powers.size(); ++i)
            powers += (i ? "," : "") + std::to_string(reports.front().second.reset_powers[i]);
        sec.notes.push_back("RESET uses fitted-value powers {" + powers + "}");
    }
    return {{std::move(sec)}, std::move(metadata), format};
}

/// Unstandardized law y = b0 * P^b1 * S^b2 * T^b3 next to the standardized slopes.
inline ReportDocument render_exponents(const std::vector<ScalingLawFit>& laws, ReportFormat format,
                                       Metadata metadata) {
    ReportSection sec;
    sec.title = "Power-law exponents y = b0 * P^b1 * S^b2 * T^b3";
    sec.header = {"Task", "n", "b0", "b1", "b2", "b3", "Standardized β1", "Standardized β2", "Standardized β3"};
    for (const auto& l : laws) {
        char b0[32];
        std::snprintf(b0, sizeof(b0), "%.4g", l.beta0);
        std::vector<std::string> row = {l.split, std::to_string(l.raw.n), b0, fmt::fixed(l.beta1, 4),
                                        fmt::fixed(l.beta2, 4), fmt::fixed(l.beta3, 4)};
        for (double b : l.standardized_betas) row.push_back(fmt::fixed(b, 4));
        sec.rows.push_back(std::move(row));
    }
    if (!laws.empty()) sec.notes.push_back(std::string("standardization: ") + to_string(laws.front().mode));
    return {{std::move(sec)}, std::move(metadata), format};
}

inline ReportDocument render_fit_metrics(const std::vector<FitMetrics>& fits, ReportFormat format,
                                         Metadata metadata) {
    ReportSection sec;
    sec.title = "Model fit metrics for the multivariate power law in log10 space";
    sec.header = {"Task", "R²", "Adjusted R²", "LOOCV R²"};
    for (const auto& f : fits)
        sec.rows.push_back({f.split, fmt::fixed(f.r2, 3), fmt::fixed(f.r2_adj, 3), fmt::fixed(f.r2_loocv, 3)});
    return {{std::move(sec)}, std::move(metadata), format};
}

struct ContrastSummary {
    SplitId split;
    std::string expression;
    Inference inference;
};

inline ReportDocument render_contrasts(const std::vector<ContrastSummary>& rows, ReportFormat format,
                                       Metadata metadata) {
    ReportSection sec;
    sec.title = "Coefficient contrasts (standardized, classic covariance)";
    sec.header = {"Task", "Contrast", "Estimate", "95% CI", "p-value"};
    for (const auto& r : rows) {
        const auto& ci = r.inference.interval;
        sec.rows.push_back({r.split, r.expression, fmt::fixed(ci.point, 2), fmt::interval(ci.lower, ci.upper, 2),
                            fmt::p_value(r.inference.p_value)});
    }
    return {{std::move(sec)}, std::move(metadata), format};
}

inline ReportDocument render_predictions(const std::vector<std::pair<SplitId, LossPrediction>>& rows,
                                         ReportFormat format, Metadata metadata) {
    ReportSection sec;
    sec.title = "Extrapolated CE loss with prediction intervals";
    sec.header = {"Task", "P", "S", "T", "Loss", "PI", "Extrapolation"};
    for (const auto& [split, p] : rows) {
        char params[32], samples[32];
        std::snprintf(params, sizeof(params), "%.4g", p.params);
        std::snprintf(samples, sizeof(samples), "%.6g", p.samples);
        sec.rows.push_back({split, params, samples, fmt::fixed(p.initial_loss, 2), fmt::fixed(p.point, 2),
                            fmt::interval(p.lower, p.upper, 2), p.extrapolation_warning ? "yes" : "no"});
    }
    if (!rows.empty()) {
        const double level = rows.front().second.log_space.level;
        sec.notes.push_back(fmt::fixed(100.0 * level, 0) +
                            "% prediction intervals; point = 10^(log10 prediction), no bias correction");
    }
    return {{std::move(sec)}, std::move(metadata), format};
}

inline ReportDocument render_compute_laws(const std::vector<ComputeLawFit>& fits, ReportFormat format,
                                          Metadata metadata) {
    ReportSection sec;
    sec.title = "Compute law y = a0 * C^a1 fitted on the Pareto frontier";
    sec.header = {"Task", "Frontier points", "a0", "a1", "R²"};
    for (const auto& f : fits) {
        char a0[32];
        std::snprintf(a0, sizeof(a0), "%.4g", f.alpha0);
        sec.rows.push_back({f.split, std::to_string(f.frontier.size()), a0, fmt::fixed(f.alpha1, 4), fmt::fixed(f.r2, 3)});
    }
    return {{std::move(sec)}, std::move(metadata), format};
}

inline ReportDocument render_trends(const std::vector<std::pair<TrendSeries, TrendFit>>& fits, ReportFormat format,
                                    Metadata metadata) {
    ReportSection sec;
    sec.title = "Downstream metric vs CE loss (log10-log10 OLS)";
    sec.header = {"Task", "Metric", "Split", "n", "Slope", "Intercept", "R²"};
    for (const auto& [s, f] : fits)
        sec.rows.push_back({s.task, s.metric_name, s.split, std::to_string(s.points.size()), fmt::fixed(f.slope, 3),
                            fmt::fixed(f.intercept, 3), fmt::fixed(f.r2, 3)});
    return {{std::move(sec)}, std::move(metadata), format};
}

inline ReportDocument render_frontier(const std::vector<CostLossPoint>& frontier, const RunDataset& runs,
                                      ReportFormat format, Metadata metadata) {
    ReportSection sec;
    sec.title = "Pareto frontier of (compute, loss)";
    sec.header = {"model_label", "seen_samples", "compute_macs", "loss"};
    for (const auto& p : frontier) {
        const auto& r = runs.records.at(p.source_run);
        sec.rows.push_back({r.model_label, std::to_string(r.seen_samples), io::format_double(p.cost),
                            io::format_double(p.loss)});
    }
    return {{std::move(sec)}, std::move(metadata), format};
}

} // namespace scalelab
