#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "probeable/analytics.hpp"
#include "probeable/error.hpp"
#include "support/paths.hpp"

namespace probeable {
namespace {

struct Attempt {
    std::string student;
    std::string problem;
    std::string symbols;  // 'd' = default probe
};

std::vector<AttemptEvent> events_from(const std::vector<Attempt> &attempts) {
    std::vector<AttemptEvent> out;
    for (const auto &a : attempts) {
        std::uint64_t seq = 0;
        for (char c : a.symbols) {
            AttemptEvent e{a.student, a.problem, ++seq, {}, EventKind::probe, c == 'd', ""};
            if (c != 'd') e.kind = static_cast<EventKind>(c);
            out.push_back(e);
        }
    }
    return out;
}

AttemptSequence valid(const std::string &symbols) {
    return {"s", "P7", symbols, classify(symbols)};
}

std::string read(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

const GroupStats &group(const CohortReport &r, const std::string &problem, GradeCategory c) {
    for (const auto &g : r.groups) {
        if (g.problem_id == problem && g.category == c) return g;
    }
    throw std::out_of_range("no group " + problem);
}

const GroupStats &totals(const CohortReport &r, const std::string &problem) {
    for (const auto &g : r.problem_totals) {
        if (g.problem_id == problem) return g;
    }
    throw std::out_of_range("no totals for " + problem);
}

TEST(SequenceMetrics, ProbesBeforeCodeAndRatio) {
    EXPECT_EQ(probes_before_first_code(valid("PPFS")), 2u);
    EXPECT_EQ(probe_code_ratio(valid("PPFS")), 1.0);
    EXPECT_EQ(probes_before_first_code(valid("PPPPFPPS")), 4u);
    EXPECT_EQ(probe_code_ratio(valid("PPPPFPPS")), 3.0);
    EXPECT_EQ(probes_before_first_code(valid("PPPPPPPPPPFS")), 10u);
    EXPECT_EQ(probe_code_ratio(valid("PPPPPPPPPPFS")), 5.0);
    EXPECT_EQ(probes_before_first_code(valid("FS")), 0u);
    EXPECT_EQ(probe_code_ratio(valid("FFS")), 0.0);
    EXPECT_THROW(probes_before_first_code(valid("PPP")), InvalidClassificationError);
    EXPECT_THROW(probe_code_ratio(valid("S")), InvalidClassificationError);
}

TEST(FiveNumber, MedianOfHalves) {
    EXPECT_FALSE(five_number_summary({}).has_value());
    EXPECT_EQ(*five_number_summary({5, 1, 3, 2, 4}), (FiveNumberSummary{1, 1.5, 3, 4.5, 5}));
    EXPECT_EQ(*five_number_summary({4, 1, 3, 2}), (FiveNumberSummary{1, 1.5, 2.5, 3.5, 4}));
    EXPECT_EQ(*five_number_summary({7}), (FiveNumberSummary{7, 7, 7, 7, 7}));
    EXPECT_EQ(*five_number_summary({1, 3}), (FiveNumberSummary{1, 1, 2, 3, 3}));
}

TEST(Report, ExclusionsAndThresholdBoundary) {
    Roster roster;
    for (const auto *id : {"a", "b", "c", "d", "e"}) roster.add(id, "B+");
    auto events = events_from({
        {"a", "P7", "S"},
        {"b", "P7", "PPP"},
        {"c", "P7", std::string(72, 'P') + "FS"},
        {"d", "P7", std::string(35, 'P') + "S"},
        {"e", "P7", "dPPFS"},
        {"ghost", "P7", "PS"},
    });
    auto report = build_report(events, roster);
    const auto &g = group(report, "P7", GradeCategory::B);
    EXPECT_EQ(g.raw_attempts, 5u);
    EXPECT_EQ(g.excluded_bare_s, 1u);
    EXPECT_EQ(g.excluded_no_code, 1u);
    EXPECT_EQ(g.included, 3u);
    EXPECT_EQ(g.ratio_outliers, 1u);
    // The ratio-36 attempt is dropped from ratios but stays in the CDF.
    ASSERT_TRUE(g.ratio_summary.has_value());
    EXPECT_EQ(g.ratio_summary->max, 35.0);
    EXPECT_EQ(g.ratio_summary->min, 1.0);
    ASSERT_EQ(g.histogram.size(), 73u);
    EXPECT_EQ(g.histogram[72], 1u);
    EXPECT_EQ(g.histogram[35], 1u);
    EXPECT_EQ(g.histogram[2], 1u);
    EXPECT_EQ(g.cdf.back().cumulative_pct, 100.0);
    EXPECT_DOUBLE_EQ(g.outlier_frac, 1.0 / 3.0);

    // Unknown students only show up in the per-problem totals.
    EXPECT_EQ(totals(report, "P7").raw_attempts, 6u);
    EXPECT_EQ(report.groups.size(), 1u);
}

TEST(Report, FilterSwitches) {
    Roster roster;
    roster.add("a", "A");
    roster.add("b", "A");
    auto events = events_from({{"a", "P8", "dS"}, {"b", "P8", "PPP"}});
    CohortFilter keep_all{false, false, false, 35};
    auto r = build_report(events, roster, keep_all);
    const auto &g = group(r, "P8", GradeCategory::A);
    EXPECT_EQ(g.included, 2u);
    // "PS" with the default counted; "PPP" has no code and stays out of the histogram.
    ASSERT_EQ(g.histogram.size(), 2u);
    EXPECT_EQ(g.histogram[1], 1u);

    auto strict = build_report(events, roster);
    EXPECT_EQ(group(strict, "P8", GradeCategory::A).included, 0u);
    EXPECT_EQ(group(strict, "P8", GradeCategory::A).excluded_bare_s, 1u);

    CohortFilter bad;
    bad.ratio_outlier_threshold = -1;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ReportProperty, ConservationAndMonotoneCdf) {
    std::mt19937_64 rng(11);
    const std::string alphabet = "dPPPFS";
    Roster roster;
    const char *grades[] = {"A", "B-", "C+", "D"};
    for (int s = 0; s < 40; ++s) roster.add("s" + std::to_string(s), grades[s % 4]);
    for (int round = 0; round < 50; ++round) {
        std::vector<Attempt> attempts;
        for (int s = 0; s < 40; ++s) {
            for (const auto *p : {"P7", "P8"}) {
                std::string sym;
                const auto len = rng() % 12;
                for (std::size_t k = 0; k < len; ++k) sym += alphabet[rng() % alphabet.size()];
                if (!sym.empty()) attempts.push_back({"s" + std::to_string(s), p, sym});
            }
        }
        auto report = build_report(events_from(attempts), roster);
        std::size_t raw_sum = 0;
        for (const auto &g : report.groups) {
            ASSERT_EQ(g.raw_attempts, g.included + g.excluded_bare_s + g.excluded_no_code);
            ASSERT_LE(g.successful, g.included);
            raw_sum += g.raw_attempts;
            double prev = 0;
            for (const auto &row : g.cdf) {
                ASSERT_GE(row.cumulative_pct, prev);
                prev = row.cumulative_pct;
            }
            if (!g.cdf.empty()) {
                ASSERT_EQ(g.cdf.back().cumulative_pct, 100.0);
            }
        }
        std::size_t totals_sum = 0;
        for (const auto &t : report.problem_totals) totals_sum += t.raw_attempts;
        ASSERT_EQ(raw_sum, totals_sum);
        ASSERT_EQ(totals_sum, attempts.size());
    }
}

TEST(Report, JsonRoundTrip) {
    Roster roster;
    roster.add("a", "C");
    roster.add("b", "D-");
    auto report = build_report(events_from({{"a", "P9", "dPPFPS"}, {"b", "P9", "FS"}, {"b", "P7", "S"}}), roster);
    EXPECT_EQ(report_from_json(report_to_json(report)), report);
    auto docs = export_report(report, ExportFormat::structured_text);
    EXPECT_EQ(report_from_json(nlohmann::json::parse(docs.json)), report);
    EXPECT_EQ(export_format_from_string("structured-text"), ExportFormat::structured_text);
    EXPECT_THROW(export_format_from_string("xlsx"), ConfigError);
}

class GoldenFixture : public ::testing::Test {
protected:
    void SetUp() override {
        const auto dir = testing::fixtures_dir() / "golden";
        events_ = AttemptStore::replay(dir / "fixture_log.ndjson")->snapshot();
        roster_ = Roster::load(dir / "fixture_roster.csv");
        report_ = build_report(events_, roster_);
    }

    std::vector<AttemptEvent> events_;
    Roster roster_;
    CohortReport report_;
};

TEST_F(GoldenFixture, CsvExportsAreByteIdentical) {
    const auto dir = testing::fixtures_dir() / "golden" / "expected";
    auto docs = export_report(report_, ExportFormat::csv);
    EXPECT_EQ(docs.cdf_csv, read(dir / "cdf.csv"));
    EXPECT_EQ(docs.ratio_csv, read(dir / "ratio.csv"));
}

TEST_F(GoldenFixture, HandCountedTotals) {
    const auto &p7 = totals(report_, "P7");
    EXPECT_EQ(p7.raw_attempts, 19u);
    EXPECT_EQ(p7.excluded_bare_s, 2u);
    EXPECT_EQ(p7.excluded_no_code, 1u);
    EXPECT_EQ(p7.included, 16u);
    EXPECT_EQ(p7.successful, 15u);
    EXPECT_EQ(p7.ratio_outliers, 1u);
    const auto &p8 = totals(report_, "P8");
    EXPECT_EQ(p8.raw_attempts, 19u);
    EXPECT_EQ(p8.excluded_bare_s, 3u);
    EXPECT_EQ(p8.excluded_no_code, 2u);
    EXPECT_EQ(p8.included, 14u);
    EXPECT_EQ(p8.ratio_outliers, 0u);

    const auto &p7a = group(report_, "P7", GradeCategory::A);
    EXPECT_EQ(p7a.histogram.size(), 73u);
    EXPECT_EQ(p7a.ratio_outliers, 1u);
    EXPECT_EQ(p7a.ratio_summary->max, 9.0);
    EXPECT_EQ(group(report_, "P8", GradeCategory::B).ratio_summary->max, 35.0);
}

}  // namespace
}  // namespace probeable
