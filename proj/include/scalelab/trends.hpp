#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <tuple>
#include <vector>

#include "scalelab/dataset.hpp"
#include "scalelab/errors.hpp"
#include "scalelab/ols.hpp"

namespace scalelab {

/// Downstream metric observed at a test CE loss.
struct TrendPoint {
    double ce_loss = 0.0;
    double metric = 0.0;
    std::string label;
};

struct TrendFit {
    double slope = 0.0;     ///< d log10 metric / d log10 loss
    double intercept = 0.0; ///< log10 metric at loss 1
    double r2 = 0.0;
    OlsFit underlying;
};

/// log10 metric ~ [1, log10 ce_loss].
inline TrendFit fit_trend(const std::vector<TrendPoint>& points) {
    if (points.size() < 3) throw InsufficientPoints("trend fit needs at least 3 points");
    Matrix x(points.size(), 1);
    Vector y(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.ce_loss > 0.0) || !(p.metric > 0.0) || !std::isfinite(p.ce_loss) || !std::isfinite(p.metric))
            throw NonPositiveValue("trend point '" + p.label + "' has a non-positive loss or metric");
        x(i, 0) = p.ce_loss;
        y[i] = p.metric;
    }
    TrendFit out;
    out.underlying = fit(make_log10_frame(x, y, {"ce_loss"}));
    out.intercept = out.underlying.coefficients[0];
    out.slope = out.underlying.coefficients[1];
    out.r2 = out.underlying.r2;
    return out;
}

/// One row of the trend CSV: label,split,ce_loss,task,metric_name,metric_value.
struct TrendRow {
    std::string label;
    std::string split;
    double ce_loss = 0.0;
    std::string task;
    std::string metric_name;
    double metric_value = 0.0;
};

/// Rows sharing (task, metric_name, split), in order of first appearance.
struct TrendSeries {
    std::string task;
    std::string metric_name;
    std::string split;
    std::vector<TrendPoint> points;
};

inline std::vector<TrendRow> parse_trend_csv(std::istream& in) {
    const auto lines = io::read_lines(in);
    if (lines.empty()) throw SchemaError("empty trend CSV: header row required");
    const io::CsvHeader header(io::split_csv_line(lines[0].second, lines[0].first), lines[0].first);
    const std::size_t c_label = header.require("label");
    const std::size_t c_split = header.require("split");
    const std::size_t c_loss = header.require("ce_loss");
    const std::size_t c_task = header.require("task");
    const std::size_t c_metric = header.require("metric_name");
    const std::size_t c_value = header.require("metric_value");
    std::vector<TrendRow> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& [no, text] = lines[li];
        const auto f = io::split_csv_line(text, no);
        if (f.size() != header.size())
            throw ParseError(no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        rows.push_back({f[c_label], f[c_split], io::parse_number(f[c_loss], no, "ce_loss"), f[c_task], f[c_metric],
                        io::parse_number(f[c_value], no, "metric_value")});
    }
    return rows;
}

inline std::vector<TrendRow> load_trend_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return parse_trend_csv(in);
}

inline std::vector<TrendSeries> group_trends(const std::vector<TrendRow>& rows) {
    std::vector<TrendSeries> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const TrendSeries& s) {
            return std::tie(s.task, s.metric_name, s.split) == std::tie(r.task, r.metric_name, r.split);
        });
        if (it == out.end()) {
            out.push_back({r.task, r.metric_name, r.split, {}});
            it = std::prev(out.end());
        }
        it->points.push_back({r.ce_loss, r.metric_value, r.label});
    }
    return out;
}

} // namespace scalelab
