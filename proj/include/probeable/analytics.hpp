#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "probeable/attempt_log.hpp"

namespace probeable {

struct CohortFilter {
    bool exclude_default_probes = true;
    bool exclude_bare_s = true;
    bool exclude_no_code = true;
    // Attempts whose probe/code ratio exceeds this are left out of the ratio
    // summary only.
    double ratio_outlier_threshold = 35.0;

    void validate() const;  // ConfigError
};

// Number of P symbols before the first F or S. Requires a valid sequence.
std::size_t probes_before_first_code(const AttemptSequence &seq);
// P count / (F + S count). Requires a valid sequence.
double probe_code_ratio(const AttemptSequence &seq);

// min, Q1, median, Q3, max. Quartiles are medians of the lower and upper
// halves; for odd counts the median itself belongs to neither half.
struct FiveNumberSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;

    bool operator==(const FiveNumberSummary &) const = default;
};

// Empty input -> nullopt.
std::optional<FiveNumberSummary> five_number_summary(std::vector<double> values);

struct CdfRow {
    std::size_t probe_count = 0;
    double cumulative_pct = 0;

    bool operator==(const CdfRow &) const = default;
};

struct GroupStats {
    std::string problem_id;
    // nullopt: every category, U included.
    std::optional<GradeCategory> category;
    std::size_t raw_attempts = 0;
    std::size_t excluded_bare_s = 0;
    std::size_t excluded_no_code = 0;
    std::size_t included = 0;
    std::size_t successful = 0;
    double success_rate = 0;
    // histogram[k] = included attempts with k probes before the first code
    // submission. Attempts without code (only when no_code attempts are not
    // excluded) stay out of the histogram and the ratio statistics.
    std::vector<std::size_t> histogram;
    std::vector<CdfRow> cdf;
    std::optional<FiveNumberSummary> ratio_summary;
    std::size_t ratio_outliers = 0;
    // ratio_outliers / attempts in the histogram
    double outlier_frac = 0;

    bool operator==(const GroupStats &) const = default;
};

struct CohortReport {
    CohortFilter filter;
    // Per-problem totals across every category, including U.
    std::vector<GroupStats> problem_totals;
    // Per (problem, category) for A..D with at least one raw attempt.
    std::vector<GroupStats> groups;

    bool operator==(const CohortReport &other) const {
        return problem_totals == other.problem_totals && groups == other.groups;
    }
};

CohortReport build_report(const std::vector<AttemptEvent> &events, const Roster &roster,
                          const CohortFilter &filter = {});

enum class ExportFormat { csv, structured_text };

struct ReportDocuments {
    // csv: cdf + ratio tables. structured_text: `json` only.
    std::string cdf_csv;
    std::string ratio_csv;
    std::string json;
};

inline constexpr const char *kCdfCsvHeader = "problem,category,probe_count,cumulative_pct";
inline constexpr const char *kRatioCsvHeader =
    "problem,category,min,q1,median,q3,max,outlier_frac,success_rate";

ReportDocuments export_report(const CohortReport &report, ExportFormat format);
ExportFormat export_format_from_string(const std::string &name);  // ConfigError

nlohmann::json report_to_json(const CohortReport &report);
CohortReport report_from_json(const nlohmann::json &j);

}  // namespace probeable
