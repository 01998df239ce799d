#include "captionprobe/report.hpp"

#include "captionprobe/csv.hpp"
#include "captionprobe/error.hpp"
#include "captionprobe/perturb.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace captionprobe {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<Direction, 2> kDirections = {Direction::TextToVideo, Direction::VideoToText};

long long tenths(double value) { return std::llround(value * 10.0); }

struct TaskLess {
    bool operator()(const std::string &a, const std::string &b) const {
        const int oa = task_order(a), ob = task_order(b);
        return oa != ob ? oa < ob : a < b;
    }
};

// Union of task ids across runs, in column order.
std::vector<std::string> column_tasks(std::span<const RunComparison> comparisons, Direction direction) {
    std::set<std::string, TaskLess> tasks;
    for (const auto &c : comparisons) {
        for (const auto &[key, report] : c.reports) {
            if (key.second == direction) tasks.insert(key.first);
        }
    }
    return {tasks.begin(), tasks.end()};
}

const MetricsReport *find(const RunComparison &c, const std::string &task, Direction d) {
    const auto it = c.reports.find({task, d});
    return it == c.reports.end() ? nullptr : &it->second;
}

const DeltaEntry *find_delta(const std::vector<DeltaEntry> &deltas, const std::string &task, Direction d) {
    for (const auto &e : deltas) {
        if (e.task_id == task && e.direction == d) return &e;
    }
    return nullptr;
}

std::string emit_markdown(std::span<const RunComparison> comparisons) {
    std::vector<std::pair<Direction, std::string>> columns;
    for (Direction d : kDirections) {
        for (auto &t : column_tasks(comparisons, d)) columns.emplace_back(d, std::move(t));
    }
    std::ostringstream out;
    out << "### R@1\n\n| Run |";
    for (const auto &[d, t] : columns) out << ' ' << direction_name(d) << ' ' << t << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto &c : comparisons) {
        out << "| " << c.label << " |";
        for (const auto &[d, t] : columns) {
            const auto *r = find(c, t, d);
            out << ' ' << (r ? format1(r->r1) : "-") << " |";
        }
        out << '\n';
    }

    std::vector<std::pair<Direction, std::string>> delta_columns;
    for (const auto &col : columns) {
        if (col.second != kOriginalTaskId) delta_columns.push_back(col);
    }
    if (delta_columns.empty()) return out.str();

    out << "\n### Drop vs original (R@1 points, % of baseline)\n\n| Run |";
    for (const auto &[d, t] : delta_columns) out << ' ' << direction_name(d) << ' ' << t << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < delta_columns.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto &c : comparisons) {
        const auto deltas = delta_table(c);
        out << "| " << c.label << " |";
        for (const auto &[d, t] : delta_columns) {
            const auto *e = find_delta(deltas, t, d);
            if (!e) {
                out << " - |";
                continue;
            }
            out << ' ' << format1(e->absolute_drop);
            if (e->relative_drop) out << " (" << format1(*e->relative_drop) << "%)";
            out << " |";
        }
        out << '\n';
    }
    return out.str();
}

std::string emit_csv(std::span<const RunComparison> comparisons) {
    std::string out = "run,task_id,direction,r1,r5,r10,median_rank,mean_rank,queries,baseline_r1,abs_drop,rel_drop\n";
    for (const auto &c : comparisons) {
        const auto deltas = delta_table(c);
        for (Direction d : kDirections) {
            for (const auto &t : column_tasks({&c, 1}, d)) {
                const auto &r = *find(c, t, d);
                std::vector<std::string> row{c.label,          t,
                                             std::string(direction_name(d)),
                                             format1(r.r1),    format1(r.r5),
                                             format1(r.r10),   format1(r.median_rank),
                                             format1(r.mean_rank), std::to_string(r.queries)};
                if (const auto *e = find_delta(deltas, t, d)) {
                    row.push_back(format1(e->baseline_r1));
                    row.push_back(format1(e->absolute_drop));
                    row.push_back(e->relative_drop ? format1(*e->relative_drop) : "");
                } else {
                    row.insert(row.end(), {"", "", ""});
                }
                out += csv::format_row(row) + "\n";
            }
        }
    }
    return out;
}

ojson report_json(const MetricsReport &r) {
    ojson j;
    j["task_id"] = r.task_id;
    j["direction"] = direction_name(r.direction);
    j["r1"] = r.r1;
    j["r5"] = r.r5;
    j["r10"] = r.r10;
    j["median_rank"] = r.median_rank;
    j["mean_rank"] = r.mean_rank;
    j["queries"] = r.queries;
    return j;
}

ojson rounded(ojson j) {
    for (const char *key : {"r1", "r5", "r10", "median_rank", "mean_rank"}) j[key] = round1(j[key].get<double>());
    return j;
}

std::string emit_json(std::span<const RunComparison> comparisons) {
    ojson doc;
    auto &runs = doc["runs"] = ojson::array();
    for (const auto &c : comparisons) {
        ojson run;
        run["label"] = c.label;
        auto &reports = run["reports"] = ojson::array();
        for (Direction d : kDirections) {
            for (const auto &t : column_tasks({&c, 1}, d)) reports.push_back(rounded(report_json(*find(c, t, d))));
        }
        auto &deltas = run["deltas"] = ojson::array();
        for (const auto &e : delta_table(c)) {
            ojson j;
            j["task_id"] = e.task_id;
            j["direction"] = direction_name(e.direction);
            j["baseline_r1"] = e.baseline_r1;
            j["task_r1"] = e.task_r1;
            j["absolute_drop"] = e.absolute_drop;
            j["relative_drop"] = e.relative_drop ? ojson(round1(*e.relative_drop)) : ojson(nullptr);
            deltas.push_back(std::move(j));
        }
        runs.push_back(std::move(run));
    }
    return doc.dump(2) + "\n";
}

double parse_double(const std::string &cell) {
    double value = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) throw DataError("report CSV: bad number '" + cell + "'");
    return value;
}

MetricsReport report_from_json(const nlohmann::json &j) {
    MetricsReport r;
    r.task_id = j.at("task_id").get<std::string>();
    r.direction = parse_direction(j.at("direction").get<std::string>());
    r.r1 = j.at("r1").get<double>();
    r.r5 = j.value("r5", 0.0);
    r.r10 = j.value("r10", 0.0);
    r.median_rank = j.value("median_rank", 0.0);
    r.mean_rank = j.value("mean_rank", 0.0);
    r.queries = j.value("queries", std::size_t{0});
    return r;
}

} // namespace

void RunComparison::add(MetricsReport report) {
    auto key = std::make_pair(report.task_id, report.direction);
    reports.insert_or_assign(std::move(key), std::move(report));
}

double round1(double value) { return static_cast<double>(tenths(value)) / 10.0; }

std::string format1(double value) {
    const long long t = tenths(value);
    const long long mag = t < 0 ? -t : t;
    return (t < 0 ? "-" : "") + std::to_string(mag / 10) + "." + std::to_string(mag % 10);
}

int task_order(std::string_view task_id) {
    if (task_id == kOriginalTaskId) return 0;
    if (const auto kind = parse_task_id(task_id)) {
        const auto it = std::find(kAllPerturbations.begin(), kAllPerturbations.end(), *kind);
        return 1 + static_cast<int>(it - kAllPerturbations.begin());
    }
    return 1000;
}

std::vector<DeltaEntry> delta_table(const RunComparison &comparison) {
    std::vector<DeltaEntry> out;
    for (Direction d : kDirections) {
        const auto tasks = column_tasks({&comparison, 1}, d);
        if (tasks.empty()) continue;
        const auto *baseline = find(comparison, std::string(kOriginalTaskId), d);
        if (!baseline) {
            throw DataError("run '" + comparison.label + "' has no '" + std::string(kOriginalTaskId) +
                            "' baseline for " + std::string(direction_name(d)));
        }
        const long long base = tenths(baseline->r1);
        for (const auto &t : tasks) {
            if (t == kOriginalTaskId) continue;
            const long long task = tenths(find(comparison, t, d)->r1);
            DeltaEntry e;
            e.task_id = t;
            e.direction = d;
            e.baseline_r1 = static_cast<double>(base) / 10.0;
            e.task_r1 = static_cast<double>(task) / 10.0;
            e.absolute_drop = static_cast<double>(base - task) / 10.0;
            if (base > 0) e.relative_drop = 100.0 * static_cast<double>(base - task) / static_cast<double>(base);
            out.push_back(std::move(e));
        }
    }
    return out;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw UsageError("unknown report format '" + std::string(name) + "'");
}

std::string emit(std::span<const RunComparison> comparisons, ReportFormat format) {
    if (comparisons.empty()) throw DataError("nothing to report");
    switch (format) {
    case ReportFormat::Markdown:
        return emit_markdown(comparisons);
    case ReportFormat::Csv:
        return emit_csv(comparisons);
    case ReportFormat::Json:
        return emit_json(comparisons);
    }
    throw UsageError("unknown report format");
}

std::vector<RunComparison> parse_report_csv(std::istream &in) {
    const auto rows = csv::read_all(in);
    if (rows.empty()) throw DataError("report CSV is empty");
    std::vector<RunComparison> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 12) throw DataError("report CSV row " + std::to_string(i + 1) + ": expected 12 fields");
        if (out.empty() || out.back().label != row[0]) out.push_back(RunComparison{row[0], {}});
        MetricsReport r;
        r.task_id = row[1];
        r.direction = parse_direction(row[2]);
        r.r1 = parse_double(row[3]);
        r.r5 = parse_double(row[4]);
        r.r10 = parse_double(row[5]);
        r.median_rank = parse_double(row[6]);
        r.mean_rank = parse_double(row[7]);
        r.queries = static_cast<std::size_t>(parse_double(row[8]));
        out.back().add(std::move(r));
    }
    return out;
}

std::string metrics_json(std::span<const MetricsReport> reports) {
    ojson doc = ojson::array();
    for (const auto &r : reports) doc.push_back(report_json(r));
    return doc.dump(2) + "\n";
}

std::vector<MetricsReport> parse_metrics_json(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        std::vector<MetricsReport> out;
        if (doc.is_object()) {
            out.push_back(report_from_json(doc));
        } else {
            for (const auto &j : doc) out.push_back(report_from_json(j));
        }
        return out;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("malformed metrics document: ") + e.what());
    }
}

std::vector<MetricsReport> load_metrics(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_metrics_json(buffer.str());
    } catch (const DataError &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace captionprobe
