#pragma once

#include "captionprobe/retrieval.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace captionprobe {

struct RunComparison {
    std::string label;
    std::map<std::pair<std::string, Direction>, MetricsReport> reports;

    void add(MetricsReport report);
};

// R@1 values are compared at one decimal, the precision reports are emitted
// at, so baseline - absolute_drop == task_r1 holds exactly.
struct DeltaEntry {
    std::string task_id;
    Direction direction = Direction::TextToVideo;
    double baseline_r1 = 0;
    double task_r1 = 0;
    double absolute_drop = 0;            // points, may be negative
    std::optional<double> relative_drop; // percent of baseline; unset when baseline is 0
};

// One entry per non-baseline (task, direction). Throws DataError when a
// direction has task reports but no "original" baseline.
std::vector<DeltaEntry> delta_table(const RunComparison &comparison);

enum class ReportFormat { Markdown, Csv, Json };

ReportFormat parse_report_format(std::string_view name);

// Rows are runs in input order; columns follow the fixed task order, t2v
// block first.
std::string emit(std::span<const RunComparison> comparisons, ReportFormat format);

// Reads the CSV emitted above back into comparisons (values at one decimal).
std::vector<RunComparison> parse_report_csv(std::istream &in);

// Rounds half away from zero to one decimal.
double round1(double value);
std::string format1(double value);

// Column order rank: "original" first, then the task table order, then
// anything else alphabetically.
int task_order(std::string_view task_id);

// Metrics document written by `eval` and read by `report`.
std::string metrics_json(std::span<const MetricsReport> reports);
std::vector<MetricsReport> parse_metrics_json(std::string_view json);
std::vector<MetricsReport> load_metrics(const std::filesystem::path &path);

} // namespace captionprobe
