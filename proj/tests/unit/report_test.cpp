#include "captionprobe/error.hpp"
#include "captionprobe/report.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace captionprobe {
namespace {

RunComparison load_run(const std::string &label, const std::string &file) {
    RunComparison run{label, {}};
    for (auto &r : load_metrics(testing::data_path("reported/" + file))) run.add(std::move(r));
    return run;
}

MetricsReport r1_only(std::string task, Direction d, double r1) {
    MetricsReport r;
    r.task_id = std::move(task);
    r.direction = d;
    r.r1 = r1;
    return r;
}

const DeltaEntry &entry(const std::vector<DeltaEntry> &deltas, std::string_view task, Direction d) {
    const auto it = std::find_if(deltas.begin(), deltas.end(),
                                 [&](const DeltaEntry &e) { return e.task_id == task && e.direction == d; });
    if (it == deltas.end()) throw std::runtime_error("missing delta " + std::string(task));
    return *it;
}

TEST(DeltaTable, ReportedFitObjectRemovalDrop) {
    const auto deltas = delta_table(load_run("FiT", "fit.metrics.json"));
    EXPECT_EQ(deltas.size(), 6u);
    const auto &e = entry(deltas, "obj_attr_removal", Direction::TextToVideo);
    EXPECT_DOUBLE_EQ(e.baseline_r1, 26.1);
    EXPECT_DOUBLE_EQ(e.task_r1, 5.2);
    EXPECT_NEAR(e.absolute_drop, 20.9, 1e-9);
    EXPECT_EQ(format1(e.absolute_drop), "20.9");
    ASSERT_TRUE(e.relative_drop.has_value());
    EXPECT_EQ(format1(*e.relative_drop), "80.1");
}

TEST(DeltaTable, ReportedDicosaActionRemovalDrop) {
    const auto deltas = delta_table(load_run("DiCoSA", "dicosa.metrics.json"));
    const auto &e = entry(deltas, "act_removal", Direction::TextToVideo);
    EXPECT_NEAR(e.absolute_drop, 6.6, 1e-9);
    EXPECT_EQ(format1(e.absolute_drop), "6.6");
}

TEST(DeltaTable, BaselineMinusDropReproducesTaskScore) {
    for (const auto &[label, file] : {std::pair{"FiT", "fit.metrics.json"}, {"DiCoSA", "dicosa.metrics.json"}}) {
        for (const auto &e : delta_table(load_run(label, file))) {
            EXPECT_EQ(format1(e.baseline_r1 - e.absolute_drop), format1(e.task_r1)) << label << ' ' << e.task_id;
        }
    }
}

TEST(DeltaTable, EqualScoresGiveZeroDrop) {
    RunComparison run{"same", {}};
    run.add(r1_only("original", Direction::TextToVideo, 42.0));
    run.add(r1_only("shuffle", Direction::TextToVideo, 42.0));
    const auto deltas = delta_table(run);
    ASSERT_EQ(deltas.size(), 1u);
    EXPECT_EQ(deltas[0].absolute_drop, 0.0);
    EXPECT_EQ(format1(deltas[0].absolute_drop), "0.0");
    EXPECT_EQ(*deltas[0].relative_drop, 0.0);
}

TEST(DeltaTable, ImprovementIsANegativeDrop) {
    RunComparison run{"up", {}};
    run.add(r1_only("original", Direction::VideoToText, 10.0));
    run.add(r1_only("reverse", Direction::VideoToText, 12.5));
    EXPECT_EQ(format1(delta_table(run)[0].absolute_drop), "-2.5");
}

TEST(DeltaTable, ZeroBaselineHasNoRelativeDrop) {
    RunComparison run{"zero", {}};
    run.add(r1_only("original", Direction::TextToVideo, 0.0));
    run.add(r1_only("shuffle", Direction::TextToVideo, 0.0));
    EXPECT_FALSE(delta_table(run)[0].relative_drop.has_value());
}

TEST(DeltaTable, MissingBaselineIsAnError) {
    RunComparison run{"orphan", {}};
    run.add(r1_only("shuffle", Direction::TextToVideo, 3.0));
    try {
        delta_table(run);
        FAIL() << "expected DataError";
    } catch (const DataError &e) {
        EXPECT_NE(std::string(e.what()).find("original"), std::string::npos);
    }
}

TEST(Rounding, HalfAwayFromZero) {
    EXPECT_EQ(format1(0.25), "0.3");
    EXPECT_EQ(format1(-0.25), "-0.3");
    EXPECT_EQ(format1(20.0), "20.0");
    EXPECT_EQ(format1(0.04), "0.0");
    EXPECT_DOUBLE_EQ(round1(26.149), 26.1);
}

TEST(TaskOrder, OriginalFirstThenTableOrder) {
    EXPECT_EQ(task_order("original"), 0);
    EXPECT_LT(task_order("act_removal"), task_order("zzz_custom"));
    EXPECT_GT(task_order("act_removal"), 0);
}

TEST(Emit, MarkdownHasOneColumnPerTaskAndDirection) {
    RunComparison run{"mock", {}};
    for (auto d : {Direction::TextToVideo, Direction::VideoToText}) {
        run.add(r1_only("original", d, 50.0));
        run.add(r1_only("shuffle", d, 40.0));
        run.add(r1_only("reverse", d, 30.0));
    }
    const std::vector<RunComparison> runs = {run};
    const auto md = emit(runs, ReportFormat::Markdown);
    std::istringstream in(md);
    std::string line;
    std::vector<std::string> headers;
    while (std::getline(in, line)) {
        if (line.rfind("| Run |", 0) == 0) headers.push_back(line);
    }
    ASSERT_EQ(headers.size(), 2u);
    EXPECT_EQ(std::count(headers[0].begin(), headers[0].end(), '|'), 2 + 6);
    EXPECT_EQ(std::count(headers[1].begin(), headers[1].end(), '|'), 2 + 4);
    EXPECT_NE(md.find("| mock | 50.0 | 40.0 | 30.0 | 50.0 | 40.0 | 30.0 |"), std::string::npos) << md;
    EXPECT_NE(md.find("10.0 (20.0%)"), std::string::npos) << md;
}

TEST(Emit, MissingCellsShowADash) {
    RunComparison a{"a", {}}, b{"b", {}};
    a.add(r1_only("original", Direction::TextToVideo, 1.0));
    a.add(r1_only("shuffle", Direction::TextToVideo, 1.0));
    b.add(r1_only("original", Direction::TextToVideo, 2.0));
    const std::vector<RunComparison> runs = {a, b};
    EXPECT_NE(emit(runs, ReportFormat::Markdown).find("| b | 2.0 | - |"), std::string::npos);
}

TEST(Emit, IsDeterministic) {
    const std::vector<RunComparison> runs = {load_run("FiT", "fit.metrics.json"),
                                             load_run("DiCoSA", "dicosa.metrics.json")};
    for (auto f : {ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json}) {
        EXPECT_EQ(emit(runs, f), emit(runs, f));
    }
}

TEST(Emit, CsvRoundTrips) {
    const std::vector<RunComparison> runs = {load_run("FiT", "fit.metrics.json"),
                                             load_run("Di,CoSA", "dicosa.metrics.json")};
    const auto csv = emit(runs, ReportFormat::Csv);
    std::istringstream in(csv);
    const auto back = parse_report_csv(in);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].label, "Di,CoSA");
    EXPECT_EQ(emit(back, ReportFormat::Csv), csv);
}

TEST(Emit, JsonCarriesRoundedDeltas) {
    const std::vector<RunComparison> runs = {load_run("FiT", "fit.metrics.json")};
    const auto doc = nlohmann::json::parse(emit(runs, ReportFormat::Json));
    const auto &deltas = doc.at("runs").at(0).at("deltas");
    bool found = false;
    for (const auto &d : deltas) {
        if (d.at("task_id") == "obj_attr_removal" && d.at("direction") == "t2v") {
            EXPECT_NEAR(d.at("absolute_drop").get<double>(), 20.9, 1e-9);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Emit, UnknownFormatIsAUsageError) {
    EXPECT_THROW(parse_report_format("yaml"), UsageError);
    EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
}

TEST(Emit, NothingToReportIsAnError) { EXPECT_THROW(emit({}, ReportFormat::Csv), DataError); }

TEST(MetricsJson, RoundTripsEveryField) {
    MetricsReport r;
    r.task_id = "shuffle";
    r.direction = Direction::VideoToText;
    r.r1 = 12.5;
    r.r5 = 40.25;
    r.r10 = 60.0;
    r.median_rank = 7.0;
    r.mean_rank = 9.125;
    r.queries = 200;
    const std::vector<MetricsReport> in = {r};
    const auto back = parse_metrics_json(metrics_json(in));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].task_id, "shuffle");
    EXPECT_EQ(back[0].direction, Direction::VideoToText);
    EXPECT_EQ(back[0].r5, 40.25);
    EXPECT_EQ(back[0].mean_rank, 9.125);
    EXPECT_EQ(back[0].queries, 200u);
}

TEST(MetricsJson, MalformedDocumentsAreDataErrors) {
    EXPECT_THROW(parse_metrics_json("{"), DataError);
    EXPECT_THROW(parse_metrics_json(R"([{"task_id":"x"}])"), DataError);
    EXPECT_THROW(parse_metrics_json(R"([{"task_id":"x","direction":"sideways","r1":1}])"), Error);
    EXPECT_THROW(load_metrics("/nonexistent/metrics.json"), IoError);
}

} // namespace
} // namespace captionprobe
