#include "probeable/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "probeable/error.hpp"

namespace probeable {

using nlohmann::json;

namespace {

std::size_t leading_probes(std::string_view symbols) {
    auto first_code = symbols.find_first_of("FS");
    return first_code == std::string_view::npos ? symbols.size() : first_code;
}

double median_of_sorted(const std::vector<double> &v, std::size_t begin, std::size_t end) {
    const auto n = end - begin;
    const auto mid = begin + n / 2;
    return n % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

// Accumulates one (problem, category) cell.
struct GroupBuilder {
    GroupStats stats;
    std::vector<double> ratios;
    std::size_t in_distribution = 0;

    void add(const AttemptSequence &seq, const CohortFilter &filter) {
        ++stats.raw_attempts;
        if (seq.classification == Classification::bare_s && filter.exclude_bare_s) {
            ++stats.excluded_bare_s;
            return;
        }
        if (seq.classification == Classification::no_code && filter.exclude_no_code) {
            ++stats.excluded_no_code;
            return;
        }
        ++stats.included;
        if (seq.has_success()) ++stats.successful;
        if (seq.classification == Classification::no_code) return;

        ++in_distribution;
        const auto before = leading_probes(seq.symbols);
        if (stats.histogram.size() <= before) stats.histogram.resize(before + 1, 0);
        ++stats.histogram[before];

        const auto probes = static_cast<double>(std::count(seq.symbols.begin(), seq.symbols.end(), 'P'));
        const auto code = static_cast<double>(seq.symbols.size()) - probes;
        const double ratio = probes / code;
        if (ratio > filter.ratio_outlier_threshold) {
            ++stats.ratio_outliers;
        } else {
            ratios.push_back(ratio);
        }
    }

    GroupStats finish() {
        stats.success_rate =
            stats.included == 0 ? 0.0 : static_cast<double>(stats.successful) / static_cast<double>(stats.included);
        std::size_t cumulative = 0;
        for (std::size_t k = 0; k < stats.histogram.size(); ++k) {
            cumulative += stats.histogram[k];
            stats.cdf.push_back({k, 100.0 * static_cast<double>(cumulative) / static_cast<double>(in_distribution)});
        }
        stats.ratio_summary = five_number_summary(std::move(ratios));
        stats.outlier_frac = in_distribution == 0 ? 0.0
                                                  : static_cast<double>(stats.ratio_outliers) /
                                                        static_cast<double>(in_distribution);
        return std::move(stats);
    }
};

std::string category_name(const std::optional<GradeCategory> &c) {
    return c ? std::string(1, to_char(*c)) : std::string("ALL");
}

std::optional<GradeCategory> category_from_name(const std::string &s) {
    if (s == "ALL") return std::nullopt;
    if (s.size() == 1 && std::string_view("ABCDU").find(s[0]) != std::string_view::npos) {
        return static_cast<GradeCategory>(s[0]);
    }
    throw ParseError("report", "unknown category '" + s + "'");
}

std::string fixed4(double x) { return fmt::format("{:.4f}", x); }

}  // namespace

void CohortFilter::validate() const {
    if (!(ratio_outlier_threshold > 0) || !std::isfinite(ratio_outlier_threshold)) {
        throw ConfigError("ratio outlier threshold must be a positive number");
    }
}

std::size_t probes_before_first_code(const AttemptSequence &seq) {
    if (seq.classification != Classification::valid) {
        throw InvalidClassificationError(std::string("probes_before_first_code needs a valid attempt, got ") +
                                         to_string(seq.classification));
    }
    return leading_probes(seq.symbols);
}

double probe_code_ratio(const AttemptSequence &seq) {
    if (seq.classification != Classification::valid) {
        throw InvalidClassificationError(std::string("probe_code_ratio needs a valid attempt, got ") +
                                         to_string(seq.classification));
    }
    const auto probes = std::count(seq.symbols.begin(), seq.symbols.end(), 'P');
    const auto code = static_cast<std::ptrdiff_t>(seq.symbols.size()) - probes;
    return static_cast<double>(probes) / static_cast<double>(code);
}

std::optional<FiveNumberSummary> five_number_summary(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    FiveNumberSummary s;
    s.min = values.front();
    s.max = values.back();
    s.median = median_of_sorted(values, 0, n);
    if (n == 1) {
        s.q1 = s.q3 = values.front();
    } else {
        s.q1 = median_of_sorted(values, 0, n / 2);
        s.q3 = median_of_sorted(values, (n + 1) / 2, n);
    }
    return s;
}

CohortReport build_report(const std::vector<AttemptEvent> &events, const Roster &roster, const CohortFilter &filter) {
    filter.validate();
    CohortReport report;
    report.filter = filter;

    std::map<std::string, GroupBuilder> totals;
    std::map<std::pair<std::string, char>, GroupBuilder> cells;
    for (const auto &seq : derive_all(events, !filter.exclude_default_probes)) {
        auto &total = totals[seq.problem_id];
        total.stats.problem_id = seq.problem_id;
        total.add(seq, filter);

        const auto cat = roster.category_of(seq.student_id);
        if (cat == GradeCategory::U) continue;
        auto &cell = cells[{seq.problem_id, to_char(cat)}];
        cell.stats.problem_id = seq.problem_id;
        cell.stats.category = cat;
        cell.add(seq, filter);
    }
    for (auto &[id, b] : totals) report.problem_totals.push_back(b.finish());
    for (auto &[key, b] : cells) report.groups.push_back(b.finish());
    return report;
}

ExportFormat export_format_from_string(const std::string &name) {
    if (name == "csv") return ExportFormat::csv;
    if (name == "structured-text" || name == "json") return ExportFormat::structured_text;
    throw ConfigError("unsupported export format '" + name + "'");
}

ReportDocuments export_report(const CohortReport &report, ExportFormat format) {
    ReportDocuments docs;
    if (format == ExportFormat::structured_text) {
        docs.json = report_to_json(report).dump(2) + "\n";
        return docs;
    }
    docs.cdf_csv = std::string(kCdfCsvHeader) + "\n";
    docs.ratio_csv = std::string(kRatioCsvHeader) + "\n";
    for (const auto &g : report.groups) {
        if (g.included == 0) continue;
        const auto cat = category_name(g.category);
        for (const auto &row : g.cdf) {
            docs.cdf_csv += fmt::format("{},{},{},{}\n", g.problem_id, cat, row.probe_count, fixed4(row.cumulative_pct));
        }
        if (g.ratio_summary) {
            const auto &s = *g.ratio_summary;
            docs.ratio_csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", g.problem_id, cat, fixed4(s.min), fixed4(s.q1),
                                          fixed4(s.median), fixed4(s.q3), fixed4(s.max), fixed4(g.outlier_frac),
                                          fixed4(g.success_rate));
        } else {
            docs.ratio_csv += fmt::format("{},{},,,,,,{},{}\n", g.problem_id, cat, fixed4(g.outlier_frac),
                                          fixed4(g.success_rate));
        }
    }
    return docs;
}

namespace {

json group_to_json(const GroupStats &g) {
    json cdf = json::array();
    for (const auto &r : g.cdf) cdf.push_back(json{{"probe_count", r.probe_count}, {"cumulative_pct", r.cumulative_pct}});
    json j{{"problem", g.problem_id},
           {"category", category_name(g.category)},
           {"raw_attempts", g.raw_attempts},
           {"excluded_bare_s", g.excluded_bare_s},
           {"excluded_no_code", g.excluded_no_code},
           {"included", g.included},
           {"successful", g.successful},
           {"success_rate", g.success_rate},
           {"probes_before_code_histogram", g.histogram},
           {"cdf", cdf},
           {"ratio_summary", nullptr},
           {"ratio_outliers", g.ratio_outliers},
           {"outlier_frac", g.outlier_frac}};
    if (g.ratio_summary) {
        const auto &s = *g.ratio_summary;
        j["ratio_summary"] = json{{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
    }
    return j;
}

GroupStats group_from_json(const json &j) {
    GroupStats g;
    g.problem_id = j.at("problem").get<std::string>();
    g.category = category_from_name(j.at("category").get<std::string>());
    g.raw_attempts = j.at("raw_attempts").get<std::size_t>();
    g.excluded_bare_s = j.at("excluded_bare_s").get<std::size_t>();
    g.excluded_no_code = j.at("excluded_no_code").get<std::size_t>();
    g.included = j.at("included").get<std::size_t>();
    g.successful = j.at("successful").get<std::size_t>();
    g.success_rate = j.at("success_rate").get<double>();
    g.histogram = j.at("probes_before_code_histogram").get<std::vector<std::size_t>>();
    for (const auto &r : j.at("cdf")) g.cdf.push_back({r.at("probe_count").get<std::size_t>(), r.at("cumulative_pct").get<double>()});
    if (const auto &s = j.at("ratio_summary"); !s.is_null()) {
        g.ratio_summary = FiveNumberSummary{s.at("min").get<double>(), s.at("q1").get<double>(),
                                            s.at("median").get<double>(), s.at("q3").get<double>(),
                                            s.at("max").get<double>()};
    }
    g.ratio_outliers = j.at("ratio_outliers").get<std::size_t>();
    g.outlier_frac = j.at("outlier_frac").get<double>();
    return g;
}

}  // namespace

json report_to_json(const CohortReport &report) {
    json totals = json::array(), groups = json::array();
    for (const auto &g : report.problem_totals) totals.push_back(group_to_json(g));
    for (const auto &g : report.groups) groups.push_back(group_to_json(g));
    return json{{"schema_version", 1},
                {"filter", json{{"exclude_default_probes", report.filter.exclude_default_probes},
                                {"exclude_bare_s", report.filter.exclude_bare_s},
                                {"exclude_no_code", report.filter.exclude_no_code},
                                {"ratio_outlier_threshold", report.filter.ratio_outlier_threshold}}},
                {"problem_totals", totals},
                {"groups", groups}};
}

CohortReport report_from_json(const json &j) {
    CohortReport r;
    try {
        const auto &f = j.at("filter");
        r.filter.exclude_default_probes = f.at("exclude_default_probes").get<bool>();
        r.filter.exclude_bare_s = f.at("exclude_bare_s").get<bool>();
        r.filter.exclude_no_code = f.at("exclude_no_code").get<bool>();
        r.filter.ratio_outlier_threshold = f.at("ratio_outlier_threshold").get<double>();
        for (const auto &g : j.at("problem_totals")) r.problem_totals.push_back(group_from_json(g));
        for (const auto &g : j.at("groups")) r.groups.push_back(group_from_json(g));
    } catch (const json::exception &e) {
        throw ParseError("report", e.what());
    }
    return r;
}

}  // namespace probeable
