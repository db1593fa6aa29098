#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scalelab/errors.hpp"

namespace scalelab {

/// Test-split label ("SC", "ST", "UC" for the reference data).
using SplitId = std::string;

namespace splits {
inline const SplitId seen_captioning = "SC";
inline const SplitId seen_translation = "ST";
inline const SplitId unseen_captioning = "UC";
} // namespace splits

/// One training configuration and its measured test losses.
struct RunRecord {
    std::string model_label;
    double total_params = 0.0;
    std::optional<double> trainable_params;
    std::optional<double> forward_gmacs;    ///< forward-pass GMACs per sample
    std::optional<double> per_sample_gmacs; ///< training GMACs per sample, G = F (1 + Pt/P)
    std::int64_t seen_samples = 0;
    double initial_loss = 0.0;
    std::vector<std::pair<SplitId, double>> losses; ///< in file order

    std::optional<double> loss(const SplitId& split) const {
        for (const auto& [s, v] : losses)
            if (s == split) return v;
        return std::nullopt;
    }

    /// G, either as given or derived from F and Pt/P.
    std::optional<double> gmacs_per_sample() const {
        if (per_sample_gmacs) return per_sample_gmacs;
        if (forward_gmacs && trainable_params && total_params > 0.0)
            return *forward_gmacs * (1.0 + *trainable_params / total_params);
        return std::nullopt;
    }

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Ordered collection of runs. Row order is significant (Durbin-Watson).
struct RunDataset {
    std::vector<RunRecord> records;
    std::string source;

    std::size_t size() const noexcept { return records.size(); }

    /// Split labels in order of first appearance.
    std::vector<SplitId> splits() const {
        std::vector<SplitId> out;
        for (const auto& r : records)
            for (const auto& [s, v] : r.losses)
                if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
        return out;
    }

    /// Runs that carry a loss for `split`, in dataset order.
    RunDataset with_split(const SplitId& split) const {
        RunDataset out{{}, source};
        for (const auto& r : records)
            if (r.loss(split)) out.records.push_back(r);
        return out;
    }
};

/// Training compute C = G * S in MACs.
inline double total_compute(const RunRecord& record) {
    const auto g = record.gmacs_per_sample();
    if (!g) throw MissingField("run '" + record.model_label + "' has no per-sample GMACs");
    if (record.seen_samples < 1) throw MissingField("run '" + record.model_label + "' has no seen samples");
    return *g * 1e9 * static_cast<double>(record.seen_samples);
}

/// Checks the RunRecord invariants; throws ValueError naming the violation.
inline void validate(const RunRecord& r) {
    const std::string who = "run '" + r.model_label + "'";
    if (r.model_label.empty()) throw ValueError("empty model label");
    if (!(r.total_params > 0.0) || !std::isfinite(r.total_params))
        throw ValueError(who + ": total_params must be positive");
    if (r.trainable_params) {
        // Pt = 0 is accepted so that G = F can be expressed through the factor.
        if (!(*r.trainable_params >= 0.0) || *r.trainable_params > r.total_params)
            throw ValueError(who + ": trainable_params must lie in [0, total_params]");
    }
    if (r.forward_gmacs && !(*r.forward_gmacs > 0.0)) throw ValueError(who + ": forward_gmacs must be positive");
    const auto g = r.gmacs_per_sample();
    if (!g) throw ValueError(who + ": per-sample GMACs missing and not derivable from forward_gmacs/trainable_params");
    if (!(*g > 0.0) || !std::isfinite(*g)) throw ValueError(who + ": per-sample GMACs must be positive");
    if (r.seen_samples < 1) throw ValueError(who + ": seen_samples must be >= 1");
    if (!(r.initial_loss > 0.0) || !std::isfinite(r.initial_loss))
        throw ValueError(who + ": initial_loss must be positive");
    if (r.losses.empty()) throw ValueError(who + ": no split losses");
    for (const auto& [s, v] : r.losses) {
        if (s.empty()) throw ValueError(who + ": empty split label");
        if (!(v > 0.0) || !std::isfinite(v)) throw ValueError(who + ": loss for split " + s + " must be positive");
    }
}

// ---------------------------------------------------------------------------
// Reference data

enum class RowOrder {
    printed, ///< published table order (1.0B block: 0.5M, 5.1M, 2.0M, 10.2M)
    sorted   ///< ascending seen samples within each model block
};

/// The 16 reference runs. Seen samples are stored as steps x batch 1024.
inline RunDataset reference_dataset(RowOrder order = RowOrder::printed) {
    struct Row {
        const char* label;
        double params;
        double gmacs;
        std::int64_t samples;
        double initial;
        double sc, st, uc;
    };
    static constexpr Row rows[] = {
        {"0.4B", 0.4e9, 62.1, 512000, 10.44, 1.92, 4.20, 5.11},
        {"0.4B", 0.4e9, 62.1, 2048000, 10.44, 1.54, 3.21, 4.51},
        {"0.4B", 0.4e9, 62.1, 5120000, 10.44, 1.38, 2.81, 4.37},
        {"0.4B", 0.4e9, 62.1, 10240000, 10.44, 1.30, 2.59, 4.43},
        {"1.0B", 1.0e9, 170.6, 512000, 9.89, 1.77, 4.13, 5.13},
        {"1.0B", 1.0e9, 170.6, 5120000, 9.89, 1.26, 2.75, 4.17},
        {"1.0B", 1.0e9, 170.6, 2048000, 9.89, 1.40, 3.15, 4.48},
        {"1.0B", 1.0e9, 170.6, 10240000, 9.89, 1.17, 2.49, 4.15},
        {"3.5B", 3.5e9, 488.8, 512000, 5.85, 1.57, 3.56, 3.44},
        {"3.5B", 3.5e9, 488.8, 2048000, 5.85, 1.15, 2.15, 3.15},
        {"3.5B", 3.5e9, 488.8, 5120000, 5.85, 1.03, 1.95, 3.10},
        {"3.5B", 3.5e9, 488.8, 10240000, 5.85, 0.97, 1.86, 3.14},
        {"11.2B", 11.2e9, 1494.5, 512000, 6.02, 1.34, 3.14, 3.04},
        {"11.2B", 11.2e9, 1494.5, 2048000, 6.02, 1.01, 1.88, 2.85},
        {"11.2B", 11.2e9, 1494.5, 5120000, 6.02, 0.92, 1.72, 2.87},
        {"11.2B", 11.2e9, 1494.5, 10240000, 6.02, 0.87, 1.65, 2.88},
    };
    RunDataset ds;
    ds.source = order == RowOrder::printed ? "reference (printed order)" : "reference (sorted order)";
    for (const Row& row : rows) {
        RunRecord r;
        r.model_label = row.label;
        r.total_params = row.params;
        r.per_sample_gmacs = row.gmacs;
        r.seen_samples = row.samples;
        r.initial_loss = row.initial;
        r.losses = {{splits::seen_captioning, row.sc},
                     {splits::seen_translation, row.st},
                     {splits::unseen_captioning, row.uc}};
        ds.records.push_back(std::move(r));
    }
    if (order == RowOrder::sorted) {
        std::stable_sort(ds.records.begin(), ds.records.end(), [](const RunRecord& a, const RunRecord& b) {
            return std::tie(a.total_params, a.seen_samples) < std::tie(b.total_params, b.seen_samples);
        });
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace io {

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            out.push_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else {
            cur += ch;
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    out.push_back(was_quoted ? cur : std::string(trim(cur)));
    return out;
}

inline double parse_number(const std::string& field, std::size_t line_no, const std::string& column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty())
        throw ParseError(line_no, "column '" + column + "': not a number: '" + field + "'");
    return v;
}

/// Column lookup over a CSV header.
class CsvHeader {
public:
    CsvHeader(std::vector<std::string> names, std::size_t line_no) : names_(std::move(names)) {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (index_.count(names_[i])) throw ParseError(line_no, "duplicate column '" + names_[i] + "'");
            index_[names_[i]] = i;
        }
    }
    std::optional<std::size_t> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t require(const std::string& name) const {
        auto i = find(name);
        if (!i) throw SchemaError("missing required column '" + name + "'");
        return *i;
    }
    std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
};

/// Non-empty, non-comment lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(no, line);
    }
    return out;
}

inline std::int64_t to_count(double v, std::size_t line_no, const std::string& column) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 9.0e18)
        throw ValueError("line " + std::to_string(line_no) + ": column '" + column + "' must be a positive integer count");
    return static_cast<std::int64_t>(v);
}

} // namespace io

inline const std::vector<std::string>& run_csv_columns() {
    static const std::vector<std::string> cols = {
        "model_label",      "total_params", "trainable_params", "forward_gmacs", "per_sample_gmacs",
        "seen_samples",     "initial_loss", "split",            "test_loss"};
    return cols;
}

/// Parses the long-format run CSV (one row per run x split).
inline RunDataset parse_runs_csv(std::istream& in, std::string source = "csv") {
    const auto lines = io::read_lines(in);
    if (lines.empty()) throw SchemaError("empty CSV: header row required");
    const io::CsvHeader header(io::split_csv_line(lines[0].second, lines[0].first), lines[0].first);
    const std::size_t c_label = header.require("model_label");
    const std::size_t c_params = header.require("total_params");
    const std::size_t c_samples = header.require("seen_samples");
    const std::size_t c_initial = header.require("initial_loss");
    const std::size_t c_split = header.require("split");
    const std::size_t c_loss = header.require("test_loss");
    const auto c_trainable = header.find("trainable_params");
    const auto c_forward = header.find("forward_gmacs");
    const auto c_gmacs = header.find("per_sample_gmacs");
    if (!c_gmacs && !(c_trainable && c_forward))
        throw SchemaError("need column 'per_sample_gmacs' or both 'forward_gmacs' and 'trainable_params'");

    RunDataset ds;
    ds.source = std::move(source);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t no = lines[li].first;
        const auto f = io::split_csv_line(lines[li].second, no);
        if (f.size() != header.size())
            throw ParseError(no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        auto opt = [&](const std::optional<std::size_t>& c, const char* name) -> std::optional<double> {
            if (!c || f[*c].empty()) return std::nullopt;
            return io::parse_number(f[*c], no, name);
        };
        RunRecord r;
        r.model_label = f[c_label];
        if (r.model_label.empty()) throw ParseError(no, "empty model_label");
        r.total_params = io::parse_number(f[c_params], no, "total_params");
        r.trainable_params = opt(c_trainable, "trainable_params");
        r.forward_gmacs = opt(c_forward, "forward_gmacs");
        r.per_sample_gmacs = opt(c_gmacs, "per_sample_gmacs");
        r.seen_samples = io::to_count(io::parse_number(f[c_samples], no, "seen_samples"), no, "seen_samples");
        r.initial_loss = io::parse_number(f[c_initial], no, "initial_loss");
        const std::string split = f[c_split];
        if (split.empty()) throw ParseError(no, "empty split label");
        const double loss = io::parse_number(f[c_loss], no, "test_loss");
        if (!(loss > 0.0) || !std::isfinite(loss))
            throw ValueError("line " + std::to_string(no) + ": test_loss must be positive");

        auto same_run = [&](const RunRecord& o) {
            return o.model_label == r.model_label && o.total_params == r.total_params &&
                   o.trainable_params == r.trainable_params && o.forward_gmacs == r.forward_gmacs &&
                   o.per_sample_gmacs == r.per_sample_gmacs && o.seen_samples == r.seen_samples &&
                   o.initial_loss == r.initial_loss;
        };
        auto it = std::find_if(ds.records.begin(), ds.records.end(), same_run);
        if (it == ds.records.end()) {
            r.losses.emplace_back(split, loss);
            ds.records.push_back(std::move(r));
        } else {
            if (it->loss(split)) throw ParseError(no, "duplicate loss for split '" + split + "' of run " + it->model_label);
            it->losses.emplace_back(split, loss);
        }
    }
    for (const auto& r : ds.records) validate(r);
    return ds;
}

/// Parses the JSON form: an array of objects mirroring RunRecord.
inline RunDataset parse_runs_json(std::istream& in, std::string source = "json") {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    if (!doc.is_array()) throw SchemaError("run JSON must be an array of objects");
    RunDataset ds;
    ds.source = std::move(source);
    std::size_t idx = 0;
    for (const auto& obj : doc) {
        ++idx;
        if (!obj.is_object()) throw SchemaError("run JSON element " + std::to_string(idx) + " is not an object");
        auto need = [&](const char* key) -> const nlohmann::ordered_json& {
            if (!obj.contains(key)) throw SchemaError("run " + std::to_string(idx) + ": missing field '" + key + "'");
            return obj.at(key);
        };
        auto num = [&](const nlohmann::ordered_json& v, const char* key) {
            if (!v.is_number()) throw SchemaError("run " + std::to_string(idx) + ": field '" + key + "' must be numeric");
            return v.get<double>();
        };
        auto opt = [&](const char* key) -> std::optional<double> {
            if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
            return num(obj.at(key), key);
        };
        RunRecord r;
        const auto& label = need("model_label");
        if (!label.is_string()) throw SchemaError("run " + std::to_string(idx) + ": model_label must be a string");
        r.model_label = label.get<std::string>();
        r.total_params = num(need("total_params"), "total_params");
        r.trainable_params = opt("trainable_params");
        r.forward_gmacs = opt("forward_gmacs");
        r.per_sample_gmacs = opt("per_sample_gmacs");
        r.seen_samples = io::to_count(num(need("seen_samples"), "seen_samples"), idx, "seen_samples");
        r.initial_loss = num(need("initial_loss"), "initial_loss");
        const auto& losses = need("losses");
        if (!losses.is_object()) throw SchemaError("run " + std::to_string(idx) + ": losses must be an object");
        for (const auto& [k, v] : losses.items()) r.losses.emplace_back(k, num(v, "losses"));
        validate(r);
        ds.records.push_back(std::move(r));
    }
    return ds;
}

enum class RunFormat { csv, json };

inline RunFormat guess_format(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot != std::string::npos && path.substr(dot) == ".json") return RunFormat::json;
    return RunFormat::csv;
}

inline RunDataset load_runs(const std::string& path, RunFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return format == RunFormat::json ? parse_runs_json(in, path) : parse_runs_csv(in, path);
}

inline RunDataset load_runs(const std::string& path) { return load_runs(path, guess_format(path)); }

inline std::string to_csv(const RunDataset& ds) {
    std::ostringstream out;
    const auto& cols = run_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); };
    for (const auto& r : ds.records) {
        for (const auto& [split, loss] : r.losses) {
            out << r.model_label << ',' << io::format_double(r.total_params) << ',' << opt(r.trainable_params) << ','
                << opt(r.forward_gmacs) << ',' << opt(r.per_sample_gmacs) << ',' << r.seen_samples << ','
                << io::format_double(r.initial_loss) << ',' << split << ',' << io::format_double(loss) << '\n';
        }
    }
    return out.str();
}

inline std::string to_json(const RunDataset& ds) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : ds.records) {
        nlohmann::ordered_json o;
        o["model_label"] = r.model_label;
        o["total_params"] = r.total_params;
        if (r.trainable_params) o["trainable_params"] = *r.trainable_params;
        if (r.forward_gmacs) o["forward_gmacs"] = *r.forward_gmacs;
        if (r.per_sample_gmacs) o["per_sample_gmacs"] = *r.per_sample_gmacs;
        o["seen_samples"] = r.seen_samples;
        o["initial_loss"] = r.initial_loss;
        nlohmann::ordered_json losses = nlohmann::ordered_json::object();
        for (const auto& [s, v] : r.losses) losses[s] = v;
        o["losses"] = std::move(losses);
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

} // namespace scalelab
