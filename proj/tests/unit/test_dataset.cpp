#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "scalelab/dataset.hpp"

using namespace scalelab;

namespace {

RunDataset parse_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_runs_csv(in);
}

RunDataset parse_json(const std::string& text) {
    std::istringstream in(text);
    return parse_runs_json(in);
}

const char* kHeader = "model_label,total_params,per_sample_gmacs,seen_samples,initial_loss,split,test_loss\n";

} // namespace

TEST(ReferenceDataset, ShapeAndValues) {
    const RunDataset ds = reference_dataset();
    ASSERT_EQ(ds.size(), 16u);
    std::set<double> params, gmacs;
    std::set<std::int64_t> samples;
    for (const auto& r : ds.records) {
        params.insert(r.total_params);
        gmacs.insert(*r.per_sample_gmacs);
        samples.insert(r.seen_samples);
    }
    EXPECT_EQ(params, (std::set<double>{0.4e9, 1.0e9, 3.5e9, 11.2e9}));
    EXPECT_EQ(gmacs, (std::set<double>{62.1, 170.6, 488.8, 1494.5}));
    EXPECT_EQ(samples.size(), 4u);

    const auto& first = ds.records.front();
    EXPECT_EQ(first.model_label, "0.4B");
    EXPECT_EQ(first.seen_samples, 512000);
    EXPECT_EQ(*first.loss("SC"), 1.92);
    EXPECT_EQ(*first.loss("ST"), 4.20);
    EXPECT_EQ(*first.loss("UC"), 5.11);

    const auto& last = ds.records.back();
    EXPECT_EQ(last.model_label, "11.2B");
    EXPECT_EQ(*last.loss("SC"), 0.87);
    EXPECT_EQ(*last.loss("ST"), 1.65);
    EXPECT_EQ(*last.loss("UC"), 2.88);

    for (const auto& r : ds.records)
        if (r.model_label == "3.5B") {
            EXPECT_EQ(r.initial_loss, 5.85);
        }
}

TEST(ReferenceDataset, PrintedOrderOfOneBillionBlock) {
    const RunDataset ds = reference_dataset();
    std::vector<std::int64_t> order;
    for (const auto& r : ds.records)
        if (r.model_label == "1.0B") order.push_back(r.seen_samples);
    EXPECT_EQ(order, (std::vector<std::int64_t>{512000, 5120000, 2048000, 10240000}));

    const RunDataset sorted = reference_dataset(RowOrder::sorted);
    order.clear();
    for (const auto& r : sorted.records)
        if (r.model_label == "1.0B") order.push_back(r.seen_samples);
    EXPECT_TRUE(std::is_sorted(order.begin(), order.end()));
}

TEST(ReferenceDataset, LossMonotoneInSamplesExceptUnseenCaptioning) {
    const RunDataset ds = reference_dataset(RowOrder::sorted);
    std::vector<std::string> increases;
    for (std::size_t i = 1; i < ds.size(); ++i) {
        const auto& a = ds.records[i - 1];
        const auto& b = ds.records[i];
        if (a.model_label != b.model_label) continue;
        for (const auto& split : {"SC", "ST", "UC"})
            if (*b.loss(split) > *a.loss(split)) increases.push_back(std::string(split) + ":" + b.model_label);
    }
    // The published UC column rises slightly at the largest sample counts.
    EXPECT_EQ(increases, (std::vector<std::string>{"UC:0.4B", "UC:3.5B", "UC:11.2B", "UC:11.2B"}));
}

TEST(ReferenceDataset, BundledCsvMatchesBuiltIn) {
    const RunDataset file = load_runs(std::string(SCALELAB_DATA_DIR) + "/reference_scaling_runs.csv");
    const RunDataset builtin = reference_dataset();
    EXPECT_EQ(file.records, builtin.records);
}

TEST(TotalCompute, ForcedArithmetic) {
    RunRecord r;
    r.model_label = "x";
    r.total_params = 4e8;
    r.per_sample_gmacs = 62.1;
    r.seen_samples = 512000;
    EXPECT_NEAR(total_compute(r), 3.17952e16, 1e2);
    r.per_sample_gmacs = 1494.5;
    r.seen_samples = 10240000;
    EXPECT_NEAR(total_compute(r), 1.530368e19, 1e5);
    const double c = total_compute(r);
    r.seen_samples *= 2;
    EXPECT_EQ(total_compute(r), 2.0 * c);
}

TEST(TotalCompute, ReferenceCostsDistinctAndPositive) {
    std::set<double> costs;
    for (const auto& r : reference_dataset().records) {
        const double c = total_compute(r);
        EXPECT_GT(c, 0.0);
        costs.insert(c);
    }
    EXPECT_EQ(costs.size(), 16u);
}

TEST(TotalCompute, MissingFieldThrows) {
    RunRecord r;
    r.model_label = "x";
    r.total_params = 1e9;
    r.seen_samples = 10;
    EXPECT_THROW(total_compute(r), MissingField);
}

TEST(LoadRuns, CsvGroupsSplitsPerRun) {
    const auto ds = parse_csv(std::string(kHeader) +
                              "a,1e9,10,1000,3.0,SC,2.5\n"
                              "a,1e9,10,1000,3.0,UC,3.5\n"
                              "b,2e9,20,1000,3.0,SC,2.4\n");
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.records[0].losses.size(), 2u);
    EXPECT_EQ(*ds.records[0].loss("UC"), 3.5);
    EXPECT_EQ(ds.splits(), (std::vector<SplitId>{"SC", "UC"}));
    EXPECT_EQ(ds.with_split("UC").size(), 1u);
}

TEST(LoadRuns, NegativeLossIsValueError) {
    EXPECT_THROW(parse_csv(std::string(kHeader) + "a,1e9,10,1000,3.0,SC,-1\n"), ValueError);
}

TEST(LoadRuns, NonPositiveParamsIsValueError) {
    EXPECT_THROW(parse_csv(std::string(kHeader) + "a,0,10,1000,3.0,SC,1\n"), ValueError);
}

TEST(LoadRuns, MissingColumnIsSchemaError) {
    EXPECT_THROW(parse_csv("model_label,total_params\na,1\n"), SchemaError);
    EXPECT_THROW(parse_csv(""), SchemaError);
}

TEST(LoadRuns, BadNumberIsParseErrorWithLine) {
    try {
        parse_csv(std::string(kHeader) + "a,1e9,10,1000,3.0,SC,2.5\nb,2e9,x,1000,3.0,SC,2.5\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(LoadRuns, WrongFieldCountAndDuplicateSplit) {
    EXPECT_THROW(parse_csv(std::string(kHeader) + "a,1e9,10,1000,3.0,SC\n"), ParseError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "a,1e9,10,1000,3.0,SC,2\na,1e9,10,1000,3.0,SC,3\n"), ParseError);
}

TEST(LoadRuns, DerivesPerSampleCostFromForwardMacs) {
    const auto ds = parse_csv(
        "model_label,total_params,trainable_params,forward_gmacs,seen_samples,initial_loss,split,test_loss\n"
        "a,1e9,5e8,10,1000,3.0,SC,2.5\n");
    EXPECT_DOUBLE_EQ(*ds.records[0].gmacs_per_sample(), 15.0);
    EXPECT_DOUBLE_EQ(total_compute(ds.records[0]), 15.0e9 * 1000);
}

TEST(LoadRuns, JsonIdentityFactor) {
    const auto ds = parse_json(R"([{"model_label": "0.4B", "total_params": 4e8, "trainable_params": 0,
                                    "forward_gmacs": 62.1, "seen_samples": 512000, "initial_loss": 10.44,
                                    "losses": {"SC": 1.92}}])");
    EXPECT_DOUBLE_EQ(*ds.records[0].gmacs_per_sample(), 62.1);
}

TEST(LoadRuns, JsonSchemaErrors) {
    EXPECT_THROW(parse_json("{}"), SchemaError);
    EXPECT_THROW(parse_json(R"([{"model_label": "a"}])"), SchemaError);
    EXPECT_THROW(parse_json("[1,"), ParseError);
    EXPECT_THROW(parse_json(R"([{"model_label": "a", "total_params": 1e9, "per_sample_gmacs": 1,
                                 "seen_samples": 10, "initial_loss": 3, "losses": {"SC": -2}}])"),
                 ValueError);
}

TEST(LoadRuns, TrainableAboveTotalRejected) {
    EXPECT_THROW(parse_csv("model_label,total_params,trainable_params,forward_gmacs,seen_samples,initial_loss,split,"
                           "test_loss\na,1e9,2e9,10,1000,3.0,SC,2.5\n"),
                 ValueError);
}

TEST(LoadRuns, MissingFileIsInputError) { EXPECT_THROW(load_runs("/nonexistent/runs.csv"), InputError); }

TEST(LoadRuns, CsvAndJsonRoundTrip) {
    const RunDataset ds = reference_dataset();
    EXPECT_EQ(parse_csv(to_csv(ds)).records, ds.records);
    EXPECT_EQ(parse_json(to_json(ds)).records, ds.records);
    EXPECT_EQ(to_csv(parse_csv(to_csv(ds))), to_csv(ds));
}

TEST(LoadRuns, CommentsBlankLinesAndQuotes) {
    const auto ds = parse_csv(std::string("# comment\n\n") + kHeader + "\"a,b\",1e9,10,1000,3.0,SC,2.5\n");
    EXPECT_EQ(ds.records[0].model_label, "a,b");
}
