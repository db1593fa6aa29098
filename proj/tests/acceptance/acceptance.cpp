// One test per acceptance criterion; each prints a [PASS]/[FAIL] line.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "../unit/oracles.hpp"
#include "scalelab/scalelab.hpp"

using namespace scalelab;

namespace {

struct Printed {
    double est, lo, hi;
};

// p-value as printed: negative means "< 0.001"
constexpr double kBelow = -1.0;

struct CoefTarget {
    const char* split;
    std::size_t index;
    Printed ols, hc3, boot;
    double p;
};

const CoefTarget kCoefficients[] = {
    {"SC", 1, {-0.59, -0.79, -0.38}, {0, -0.85, -0.33}, {0, -0.79, -0.40}, kBelow},
    {"SC", 2, {-0.72, -0.80, -0.63}, {0, -0.82, -0.61}, {0, -0.79, -0.61}, kBelow},
    {"SC", 3, {0.10, -0.10, 0.31}, {0, -0.17, 0.38}, {0, -0.11, 0.29}, 0.293},
    {"ST", 1, {-0.36, -0.74, 0.03}, {0, -0.85, 0.14}, {0, -0.69, 0.05}, 0.068},
    {"ST", 2, {-0.73, -0.89, -0.57}, {0, -0.92, -0.54}, {0, -0.85, -0.52}, kBelow},
    {"ST", 3, {0.29, -0.09, 0.68}, {0, -0.20, 0.78}, {0, -0.03, 0.71}, 0.125},
    {"UC", 1, {-0.41, -0.69, -0.12}, {0, -0.69, -0.13}, {0, -0.58, -0.06}, 0.009},
    {"UC", 2, {-0.23, -0.35, -0.11}, {0, -0.38, -0.08}, {0, -0.35, -0.10}, 0.001},
    {"UC", 3, {0.57, 0.29, 0.85}, {0, 0.29, 0.85}, {0, 0.38, 0.86}, kBelow},
};

const RunDataset& runs() {
    static const RunDataset ds = reference_dataset();
    return ds;
}

const std::map<SplitId, ScalingLawFit>& laws() {
    static const auto m = [] {
        std::map<SplitId, ScalingLawFit> out;
        for (auto& l : fit_all(runs(), Standardization::per_task)) out.emplace(l.split, std::move(l));
        return out;
    }();
    return m;
}

BootstrapOptions reference_bootstrap() { return BootstrapOptions{}; }

const std::map<std::pair<SplitId, std::size_t>, CoefficientSummary>& summaries() {
    static const auto m = [] {
        std::map<std::pair<SplitId, std::size_t>, CoefficientSummary> out;
        for (const auto& [split, law] : laws())
            for (auto& s : summarize_coefficients(law, reference_bootstrap())) out.emplace(std::make_pair(split, s.index), s);
        return out;
    }();
    return m;
}

std::string show(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void expect_within(double got, double want, double tol, const std::string& what) {
    EXPECT_LE(std::abs(got - want), tol + 1e-12)
        << what << ": got " << show(got) << ", printed " << show(want) << " (tolerance " << tol << ")";
}

void expect_p(double got, double printed, double tol, const std::string& what) {
    if (printed == kBelow) {
        EXPECT_LT(got, 0.001) << what << ": p = " << got << ", printed < 0.001";
    } else {
        EXPECT_GE(got, 0.001) << what << ": p = " << got << " is below 0.001, printed " << printed;
        expect_within(got, printed, tol, what);
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
    void OnTestEnd(const ::testing::TestInfo& info) override {
        std::string name = info.name();
        for (char& c : name)
            if (c == '_') c = ' ';
        std::printf("[%s] %s\n", info.result()->Passed() ? "PASS" : "FAIL", name.c_str());
        std::fflush(stdout);
    }
};

} // namespace

TEST(Acceptance, C1_standardized_coefficients) {
    for (const auto& t : kCoefficients) {
        const auto& s = summaries().at({t.split, t.index});
        const std::string tag = std::string(t.split) + " β" + std::to_string(t.index);
        expect_within(s.ols.interval.point, t.ols.est, 0.01, tag + " estimate");
        expect_within(s.ols.interval.lower, t.ols.lo, 0.01, tag + " CI lower");
        expect_within(s.ols.interval.upper, t.ols.hi, 0.01, tag + " CI upper");
        expect_p(s.ols.p_value, t.p, 0.005, tag + " p-value");
    }
}

TEST(Acceptance, C2_fit_metrics) {
    const std::map<SplitId, std::array<double, 3>> want = {
        {"SC", {0.982, 0.977, 0.965}}, {"ST", {0.935, 0.919, 0.873}}, {"UC", {0.965, 0.956, 0.936}}};
    for (const auto& [split, w] : want) {
        const auto m = fit_metrics(laws().at(split));
        expect_within(m.r2, w[0], 0.003, split + " R²");
        expect_within(m.r2_adj, w[1], 0.003, split + " adjusted R²");
        expect_within(m.r2_loocv, w[2], 0.003, split + " LOOCV R²");
    }
}

TEST(Acceptance, C3_diagnostics) {
    struct Row {
        double bp_lm, bp_lm_p, bp_f, bp_f_p, dw, reset, reset_p, jb, jb_p, om, om_p;
    };
    const std::map<SplitId, Row> want = {
        {"SC", {5.628, 0.131, 2.170, 0.145, 2.098, 0.015, 0.904, 0.357, 0.836, 0.164, 0.921}},
        {"ST", {6.463, 0.091, 2.711, 0.092, 1.872, 0.171, 0.687, 0.354, 0.838, 0.156, 0.925}},
        {"UC", {2.978, 0.395, 0.915, 0.463, 1.848, 0.121, 0.734, 0.918, 0.632, 2.252, 0.324}},
    };
    for (const auto& [split, w] : want) {
        const auto rep = run_all(laws().at(split).reporting_fit(), {2});
        auto stat = [&](const DiagnosticEntry& e, double s, double p, const std::string& name) {
            ASSERT_TRUE(e.ok()) << split << " " << name << ": " << e.error;
            expect_within(e.result->statistic, s, 0.05, split + " " + name);
            if (p >= 0) expect_within(*e.result->p_value, p, 0.02, split + " " + name + " p");
        };
        expect_within(rep.condition_number.result->statistic, 4.611, 0.01, split + " condition number");
        stat(rep.bp_lm, w.bp_lm, w.bp_lm_p, "Breusch-Pagan LM");
        stat(rep.bp_f, w.bp_f, w.bp_f_p, "Breusch-Pagan F");
        stat(rep.durbin_watson, w.dw, -1, "Durbin-Watson");
        stat(rep.reset, w.reset, w.reset_p, "RESET");
        stat(rep.jarque_bera, w.jb, w.jb_p, "Jarque-Bera");
        stat(rep.omnibus, w.om, w.om_p, "Omnibus");
    }
}

TEST(Acceptance, C4_robust_and_bootstrap_intervals) {
    for (const auto& t : kCoefficients) {
        const auto& s = summaries().at({t.split, t.index});
        const std::string tag = std::string(t.split) + " β" + std::to_string(t.index);
        expect_within(s.hc3.interval.lower, t.hc3.lo, 0.02, tag + " HC3 lower");
        expect_within(s.hc3.interval.upper, t.hc3.hi, 0.02, tag + " HC3 upper");
        ASSERT_TRUE(s.bootstrap.has_value());
        expect_within(s.bootstrap->lower, t.boot.lo, 0.04, tag + " bootstrap lower");
        expect_within(s.bootstrap->upper, t.boot.hi, 0.04, tag + " bootstrap upper");
    }
}

TEST(Acceptance, C5_contrasts) {
    struct Target {
        const char* split;
        const char* expr;
        Printed want;
    };
    const Target targets[] = {
        {"SC", "b1-b2", {0.13, -0.09, 0.35}},
        {"UC", "b3+b2", {0.34, 0.03, 0.65}},
        {"UC", "b3+b1", {0.16, -0.39, 0.72}},
        {"UC", "b1-b2", {-0.18, -0.48, 0.13}},
    };
    for (const auto& t : targets) {
        const OlsFit& f = laws().at(t.split).reporting_fit();
        const auto c = contrast(f, parse_contrast(t.expr, f.k));
        const std::string tag = std::string(t.split) + " " + t.expr;
        expect_within(c.interval.point, t.want.est, 0.01, tag + " estimate");
        expect_within(c.interval.lower, t.want.lo, 0.02, tag + " lower");
        expect_within(c.interval.upper, t.want.hi, 0.02, tag + " upper");
    }
}

TEST(Acceptance, C6_extrapolation) {
    const std::map<SplitId, Printed> want = {
        {"UC", {1.92, 1.65, 2.23}}, {"ST", {1.18, 0.89, 1.57}}, {"SC", {0.71, 0.63, 0.80}}};
    for (const auto& [split, w] : want) {
        const auto p = extrapolate(laws().at(split), 30e9, 10240000, 3.0);
        expect_within(p.point, w.est, 0.03, split + " predicted loss");
        expect_within(p.lower, w.lo, 0.06, split + " PI lower");
        expect_within(p.upper, w.hi, 0.06, split + " PI upper");
    }
}

TEST(Acceptance, C7_compute_law_on_frontier) {
    const std::map<SplitId, double> want = {{"SC", 0.98}, {"ST", 0.95}, {"UC", 0.87}};
    for (const auto& [split, r2] : want) {
        const auto pts = cost_loss_points(runs(), split);
        const auto law = fit_compute_law(pts, split);
        EXPECT_EQ(law.frontier, oracle::brute_force_frontier(pts)) << split << " frontier";
        expect_within(law.r2, r2, 0.02, split + " compute-law R²");
    }
}

TEST(Acceptance, C8_downstream_trend) {
    const auto series = group_trends(load_trend_csv(std::string(SCALELAB_DATA_DIR) + "/unseen_captioning_trend.csv"));
    ASSERT_EQ(series.size(), 1u);
    expect_within(fit_trend(series[0].points).r2, 0.52, 0.05, "unseen captioning trend R²");
}

TEST(Acceptance, C9_property_suites) {
    std::mt19937_64 g(99);
    auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); };

    // noiseless power-law recovery
    {
        RunDataset ds;
        for (int i = 0; i < 20; ++i) {
            RunRecord r;
            r.model_label = "m" + std::to_string(i);
            r.total_params = std::pow(10.0, unif(8, 11));
            r.seen_samples = static_cast<std::int64_t>(std::pow(10.0, unif(5, 7.5)));
            r.initial_loss = unif(2, 12);
            r.per_sample_gmacs = r.total_params * 1e-7;
            const double y = 4.0 * std::pow(r.total_params, -0.2) *
                             std::pow(static_cast<double>(r.seen_samples), -0.4) * std::pow(r.initial_loss, 0.7);
            r.losses.emplace_back("SC", y);
            ds.records.push_back(r);
        }
        const auto law = fit_scaling_law(ds, "SC");
        EXPECT_NEAR(law.beta1, -0.2, 1e-8);
        EXPECT_NEAR(law.beta2, -0.4, 1e-8);
        EXPECT_NEAR(law.beta3, 0.7, 1e-8);

        // unit invariance of exponents and standardized coefficients
        RunDataset scaled = ds;
        for (auto& r : scaled.records) {
            r.total_params *= 1e-6;
            r.initial_loss *= 7.0;
            r.losses[0].second *= 100.0;
        }
        const auto law2 = fit_scaling_law(scaled, "SC");
        EXPECT_NEAR(law.beta1, law2.beta1, 1e-10);
        EXPECT_NEAR(law.beta3, law2.beta3, 1e-10);
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_NEAR(law.standardized_betas[j], law2.standardized_betas[j], 1e-10);
    }

    // residual orthogonality, PRESS >= SSE, DW in [0, 4]
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 8 + static_cast<std::size_t>(trial % 30);
        RegressionFrame fr;
        fr.x = Matrix(n, 3);
        fr.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            fr.x(i, 0) = 1.0;
            fr.x(i, 1) = unif(-3, 3);
            fr.x(i, 2) = unif(-3, 3);
            fr.y[i] = 0.5 + fr.x(i, 1) - 2.0 * fr.x(i, 2) + unif(-1, 1);
        }
        fr.column_names = {"intercept", "x1", "x2"};
        fr.predictor_scaling.assign(2, ColumnScaling{});
        fr.log10_predictors = fr.log10_response = false;
        const OlsFit f = fit(fr);
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += fr.x(i, j) * f.residuals[i];
            EXPECT_NEAR(s, 0.0, 1e-9);
        }
        EXPECT_LE(f.r2_loocv, f.r2 + 1e-12);
        const double dw = durbin_watson(f.residuals);
        EXPECT_GE(dw, 0.0);
        EXPECT_LE(dw, 4.0);
    }

    // CDF monotonicity and symmetry
    for (int trial = 0; trial < 50; ++trial) {
        const StudentT t(unif(1, 60));
        double prev = 0.0;
        for (double x = -8; x <= 8; x += 0.25) {
            const double c = t.cdf(x);
            EXPECT_GE(c, prev);
            EXPECT_NEAR(c + t.cdf(-x), 1.0, 1e-12);
            prev = c;
        }
    }

    // bootstrap determinism under varying parallelism
    {
        const auto& frame = laws().at("UC").reporting_fit().frame;
        BootstrapOptions opt{500, 4242, 1};
        const auto a = bootstrap_coefficients(frame, opt);
        for (unsigned w : {2u, 3u, 8u}) {
            opt.workers = w;
            EXPECT_EQ(bootstrap_coefficients(frame, opt).coefficients, a.coefficients) << w << " workers";
        }
    }

    // Pareto idempotence and oracle equivalence
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<CostLossPoint> pts;
        const std::size_t n = 1 + static_cast<std::size_t>(unif(0, 40));
        for (std::size_t i = 0; i < n; ++i) {
            const bool coarse = trial % 2 == 0;
            pts.push_back({coarse ? std::floor(unif(0, 6)) : unif(0, 1), coarse ? std::floor(unif(0, 6)) : unif(0, 1), i});
        }
        const auto front = pareto_frontier(pts);
        EXPECT_EQ(front, oracle::brute_force_frontier(pts));
        EXPECT_EQ(pareto_frontier(front), front);
    }
}

TEST(Acceptance, C10_reference_report_matches_golden) {
    const std::string golden = slurp(std::string(SCALELAB_GOLDEN_DIR) + "/reference_report.md");
    ASSERT_FALSE(golden.empty()) << "golden file missing";
    const std::string md = render(full_report(runs(), AnalysisOptions{}, ReportFormat::markdown));
    if (md == golden) return;
    std::istringstream a(md), b(golden);
    std::string la, lb;
    for (int line = 1;; ++line) {
        const bool ga = static_cast<bool>(std::getline(a, la));
        const bool gb = static_cast<bool>(std::getline(b, lb));
        if (!ga && !gb) break;
        if (la != lb || ga != gb) {
            ADD_FAILURE() << "line " << line << "\n  got:    " << la << "\n  golden: " << lb;
            break;
        }
    }
    EXPECT_EQ(md.size(), golden.size());
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionPrinter);
    return RUN_ALL_TESTS();
}
