#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scalelab/scalelab.hpp"

using namespace scalelab;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::string format = "markdown";
    std::string output;
    std::string input;
    std::string split = splits::seen_captioning;
    std::string standardize = "per-task";
    std::string reset_powers = "2";
    double level = 0.95;
    std::optional<std::uint64_t> seed;
    std::size_t replicates = 10000;
    unsigned workers = 0;
};

std::uint64_t default_seed() {
    const char* env = std::getenv("SCALELAB_SEED");
    if (env == nullptr || *env == '\0') return BootstrapOptions{}.seed;
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end) throw InvalidParameter(std::string("SCALELAB_SEED is not an integer: ") + env);
    return v;
}

Standardization parse_standardization(const std::string& s) {
    if (s == "per-task" || s == "per_task") return Standardization::per_task;
    if (s == "pooled") return Standardization::pooled;
    if (s == "none") return Standardization::none;
    throw InvalidParameter("unknown standardization '" + s + "'");
}

std::vector<int> parse_powers(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto t = io::trim(tok);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
            throw InvalidParameter("bad RESET power '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidParameter("no RESET powers given");
    return out;
}

RunDataset load_input(const Globals& g) {
    if (g.input.empty()) return reference_dataset();
    return load_runs(g.input);
}

AnalysisOptions analysis_options(const Globals& g, bool with_bootstrap) {
    AnalysisOptions opt;
    opt.standardization = parse_standardization(g.standardize);
    opt.reset_powers = parse_powers(g.reset_powers);
    opt.level = g.level;
    opt.data_source = g.input.empty() ? "reference" : g.input;
    if (with_bootstrap) {
        BootstrapOptions b;
        b.seed = g.seed ? *g.seed : default_seed();
        b.replicates = g.replicates;
        b.workers = g.workers;
        opt.bootstrap = b;
    } else {
        opt.bootstrap.reset();
    }
    return opt;
}

void emit(const Globals& g, const std::string& text) {
    if (g.output.empty() || g.output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(g.output, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + g.output + "' for writing");
    out << text;
    if (!out) throw InputError("failed writing '" + g.output + "'");
}

Metadata meta_for(const Globals& g, bool with_bootstrap) {
    return make_metadata(report_config(analysis_options(g, with_bootstrap)));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scaling-law fitting, diagnostics and extrapolation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);

    Globals g;
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"markdown", "json", "csv"}))
        ->capture_default_str();
    app.add_option("--output", g.output, "Write to PATH instead of stdout");

    auto add_input = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--input", g.input, "Runs file (CSV or JSON)");
        if (required) o->required();
        return o;
    };
    auto add_split = [&](CLI::App* sub) { sub->add_option("--split", g.split, "Split label")->capture_default_str(); };
    auto add_standardize = [&](CLI::App* sub) {
        sub->add_option("--standardize", g.standardize, "pooled | per-task | none")->capture_default_str();
    };

    auto* fit_compute_cmd = app.add_subcommand("fit-compute", "Fit loss = a0 * C^a1 on the Pareto frontier");
    add_input(fit_compute_cmd, false);
    add_split(fit_compute_cmd);

    auto* fit_law_cmd = app.add_subcommand("fit-law", "Fit loss = b0 * P^b1 * S^b2 * T^b3");
    add_input(fit_law_cmd, false);
    add_split(fit_law_cmd);
    add_standardize(fit_law_cmd);
    fit_law_cmd->add_option("--level", g.level, "Confidence level")->capture_default_str();

    auto* diagnose_cmd = app.add_subcommand("diagnose", "OLS diagnostic battery");
    add_input(diagnose_cmd, false);
    add_split(diagnose_cmd);
    add_standardize(diagnose_cmd);
    diagnose_cmd->add_option("--reset-powers", g.reset_powers, "Comma-separated RESET powers")->capture_default_str();

    auto* bootstrap_cmd = app.add_subcommand("bootstrap", "Percentile bootstrap CIs of the standardized coefficients");
    add_input(bootstrap_cmd, false);
    add_split(bootstrap_cmd);
    add_standardize(bootstrap_cmd);
    bootstrap_cmd->add_option("--replicates", g.replicates, "Bootstrap replicates")->capture_default_str();
    bootstrap_cmd->add_option("--seed", g.seed, "RNG seed (default: SCALELAB_SEED or 20240611)");
    bootstrap_cmd->add_option("--workers", g.workers, "Worker threads (0 = all cores)");
    bootstrap_cmd->add_option("--level", g.level, "Confidence level")->capture_default_str();

    std::string expr;
    auto* contrast_cmd = app.add_subcommand("contrast", "Linear combination of standardized coefficients");
    add_input(contrast_cmd, false);
    add_split(contrast_cmd);
    add_standardize(contrast_cmd);
    contrast_cmd->add_option("--expr", expr, "e.g. b1-b2 or b3+b2")->required();
    contrast_cmd->add_option("--level", g.level, "Confidence level")->capture_default_str();

    double params = 0.0, samples = 0.0, initial_loss = 0.0;
    std::string sweep;
    double sweep_from = 0.0, sweep_to = 0.0;
    std::size_t sweep_points = 50;
    auto* extrapolate_cmd = app.add_subcommand("extrapolate", "Predict loss with a prediction interval");
    add_input(extrapolate_cmd, false);
    add_split(extrapolate_cmd);
    extrapolate_cmd->add_option("--params", params, "Total parameters P")->required();
    extrapolate_cmd->add_option("--samples", samples, "Seen samples S")->required();
    extrapolate_cmd->add_option("--initial-loss", initial_loss, "Initial loss T")->required();
    extrapolate_cmd->add_option("--level", g.level, "Prediction interval level")->capture_default_str();
    auto* sweep_opt = extrapolate_cmd->add_option("--sweep", sweep, "Emit a curve over params or samples as CSV")
                          ->check(CLI::IsMember({"params", "samples"}));
    extrapolate_cmd->add_option("--from", sweep_from, "Sweep start")->needs(sweep_opt);
    extrapolate_cmd->add_option("--to", sweep_to, "Sweep end")->needs(sweep_opt);
    extrapolate_cmd->add_option("--points", sweep_points, "Sweep points")->needs(sweep_opt)->capture_default_str();

    auto* pareto_cmd = app.add_subcommand("pareto", "Pareto frontier of (compute, loss)");
    add_input(pareto_cmd, false);
    add_split(pareto_cmd);

    auto* trend_cmd = app.add_subcommand("trend", "Downstream metric vs CE loss fits");
    add_input(trend_cmd, true);

    bool reference = false;
    auto* report_cmd = app.add_subcommand("report", "All coefficient, diagnostic and fit tables");
    report_cmd->add_flag("--reference", reference, "Use the bundled reference dataset");
    add_input(report_cmd, false);
    add_standardize(report_cmd);
    report_cmd->add_option("--reset-powers", g.reset_powers, "Comma-separated RESET powers")->capture_default_str();
    report_cmd->add_option("--replicates", g.replicates, "Bootstrap replicates")->capture_default_str();
    report_cmd->add_option("--seed", g.seed, "RNG seed (default: SCALELAB_SEED or 20240611)");
    report_cmd->add_option("--workers", g.workers, "Worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        const ReportFormat format = parse_report_format(g.format);
        auto* cmd = app.get_subcommands().front();

        if (cmd == fit_compute_cmd) {
            const RunDataset runs = load_input(g);
            const auto law = fit_compute_law(runs, g.split);
            emit(g, render(render_compute_laws({law}, format, meta_for(g, false))));
        } else if (cmd == fit_law_cmd) {
            const RunDataset runs = load_input(g);
            const auto opt = analysis_options(g, false);
            const auto law = fit_scaling_law(runs, g.split, opt.standardization);
            const Metadata meta = make_metadata(report_config(opt));
            emit(g, render(merge({render_exponents({law}, format, {}),
                                  render_coefficients(summarize_coefficients(law, std::nullopt, opt.level), {true, false},
                                                      format, {}),
                                  render_fit_metrics({fit_metrics(law)}, format, {})},
                                 meta, format)));
        } else if (cmd == diagnose_cmd) {
            const RunDataset runs = load_input(g);
            const auto opt = analysis_options(g, false);
            const auto law = fit_scaling_law(runs, g.split, opt.standardization);
            emit(g, render(render_diagnostics({{law.split, run_all(law.reporting_fit(), opt.reset_powers)}}, format,
                                              make_metadata(report_config(opt)))));
        } else if (cmd == bootstrap_cmd) {
            const RunDataset runs = load_input(g);
            const auto opt = analysis_options(g, true);
            const auto law = fit_scaling_law(runs, g.split, opt.standardization);
            emit(g, render(render_coefficients(summarize_coefficients(law, opt.bootstrap, opt.level), {false, true},
                                               format, make_metadata(report_config(opt)))));
        } else if (cmd == contrast_cmd) {
            const RunDataset runs = load_input(g);
            const auto opt = analysis_options(g, false);
            const auto law = fit_scaling_law(runs, g.split, opt.standardization);
            const OlsFit& f = law.reporting_fit();
            const Vector w = parse_contrast(expr, f.k);
            ContrastSummary row{law.split, expr, contrast(f, w, IntervalMethod::classic_t, opt.level)};
            emit(g, render(render_contrasts({row}, format, make_metadata(report_config(opt)))));
        } else if (cmd == extrapolate_cmd) {
            const RunDataset runs = load_input(g);
            const auto law = fit_scaling_law(runs, g.split);
            if (!sweep.empty()) {
                const bool over_params = sweep == "params";
                const auto curve = predict_curve(law, over_params ? SweepVariable::params : SweepVariable::samples,
                                                 over_params ? samples : params, initial_loss, sweep_from, sweep_to,
                                                 sweep_points, g.level);
                emit(g, curve_to_csv(curve));
            } else {
                const auto p = extrapolate(law, params, samples, initial_loss, g.level);
                if (p.extrapolation_warning)
                    std::cerr << "warning: leverage " << p.leverage << " exceeds every training point\n";
                emit(g, render(render_predictions({{law.split, p}}, format, meta_for(g, false))));
            }
        } else if (cmd == pareto_cmd) {
            const RunDataset runs = load_input(g);
            const auto pts = cost_loss_points(runs, g.split);
            const bool format_given = app.get_option("--format")->count() > 0;
            emit(g, render(render_frontier(pareto_frontier(pts), runs, format_given ? format : ReportFormat::csv,
                                           meta_for(g, false))));
        } else if (cmd == trend_cmd) {
            const auto series = group_trends(load_trend_csv(g.input));
            std::vector<std::pair<TrendSeries, TrendFit>> fits;
            for (const auto& s : series) fits.emplace_back(s, fit_trend(s.points));
            ReportConfig cfg;
            cfg.data_source = g.input;
            emit(g, render(render_trends(fits, format, make_metadata(cfg))));
        } else if (cmd == report_cmd) {
            if (reference == !g.input.empty()) throw InvalidParameter("report needs exactly one of --reference or --input");
            const RunDataset runs = load_input(g);
            emit(g, render(full_report(runs, analysis_options(g, true), format)));
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
