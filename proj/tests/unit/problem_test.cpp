#include <fstream>

#include <gtest/gtest.h>

#include "probeable/error.hpp"
#include "probeable/problem.hpp"
#include "support/paths.hpp"

namespace probeable {
namespace {

using nlohmann::json;
using testing::TempDir;

json minimal_problem(const std::string &id) {
    return json{
        {"schema_version", 1},
        {"id", id},
        {"statement", "Implement a function to find the first vowel in a string"},
        {"function", "FirstVowel"},
        {"signature", json::array({json{{"name", "s"}, {"kind", "string"}, {"max_length", 10}}})},
        {"default_probe", json::array({"apple"})},
        {"oracle", json{{"ref", "first_vowel"}}},
        {"call_template", "printf(\"%c\\n\", FirstVowel({0}));"},
        {"tests", json::array({json{{"input", json::array({"cat"})}, {"expected", "a"}}})},
        {"runner_profile", "c"},
    };
}

void write(const std::filesystem::path &p, const std::string &text) {
    std::ofstream(p) << text;
}

TEST(ProblemModel, LoadsBundledBankSortedById) {
    auto specs = load_problem_bank(testing::bank_dir());
    ASSERT_EQ(specs.size(), 3u);
    EXPECT_EQ(specs[0].id, "P7");
    EXPECT_EQ(specs[1].id, "P8");
    EXPECT_EQ(specs[2].id, "P9");
    for (const auto &s : specs) {
        EXPECT_NO_THROW(s.check_invariants()) << s.id;
        EXPECT_TRUE(s.signature.conforms(s.default_probe)) << s.id;
    }
    const ProbeArgs p7_default{IntArray{1, 2, 3}, std::int64_t{3}, std::int64_t{0}, std::int64_t{5}};
    EXPECT_EQ(specs[0].default_probe, p7_default);
    EXPECT_EQ(specs[2].default_probe, ProbeArgs{std::string("apple")});
}

TEST(ProblemModel, JsonRoundTrip) {
    for (const auto &spec : load_problem_bank(testing::bank_dir())) {
        EXPECT_EQ(problem_from_json(problem_to_json(spec), "roundtrip"), spec) << spec.id;
    }
}

TEST(ProblemModel, DuplicateIdsRejected) {
    TempDir dir;
    write(dir / "a.problem", minimal_problem("X1").dump());
    write(dir / "b.problem", minimal_problem("X1").dump());
    try {
        load_problem_bank(dir.path());
        FAIL() << "expected DuplicateIdError";
    } catch (const DuplicateIdError &e) {
        EXPECT_NE(std::string(e.what()).find("X1"), std::string::npos);
    }
}

TEST(ProblemModel, EmptyDirectoryIsAnEmptyBank) {
    TempDir dir;
    EXPECT_TRUE(load_problem_bank(dir.path()).empty());
    EXPECT_THROW(load_problem_bank(dir / "missing"), Error);
}

TEST(ProblemModel, ParseErrorCarriesLineAndColumn) {
    TempDir dir;
    write(dir / "bad.problem", "{\n  \"id\": \"X\",\n  oops\n}\n");
    try {
        load_problem_bank(dir.path());
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_NE(e.location().find("bad.problem:3:"), std::string::npos) << e.location();
    }
}

TEST(ProblemModel, SchemaViolationsAreParseErrors) {
    auto j = minimal_problem("X");
    j["schema_version"] = 2;
    EXPECT_THROW(problem_from_json(j, "x"), ParseError);
    j = minimal_problem("X");
    j.erase("statement");
    EXPECT_THROW(problem_from_json(j, "x"), ParseError);
    j = minimal_problem("X");
    j["tests"] = json::array();
    EXPECT_THROW(problem_from_json(j, "x"), ParseError);
    j = minimal_problem("X");
    j["signature"][0]["kind"] = "float";
    EXPECT_THROW(problem_from_json(j, "x"), ParseError);
}

TEST(ProblemModel, DefaultProbeMustConform) {
    auto j = minimal_problem("X");
    j["default_probe"] = json::array({"this string is too long"});
    try {
        problem_from_json(j, "x");
        FAIL() << "expected SignatureError";
    } catch (const SignatureError &e) {
        EXPECT_EQ(e.param(), "s");
    }
}

TEST(ProblemModel, SignatureValidation) {
    auto spec = load_problem_bank(testing::bank_dir()).at(0);  // P7
    const auto &sig = spec.signature;
    auto param_of = [&](const ProbeArgs &args) {
        try {
            sig.validate(args);
        } catch (const SignatureError &e) {
            return e.param();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(param_of({IntArray{1, 2, 3}, std::int64_t{3}, std::int64_t{0}, std::int64_t{5}}), "<none>");
    EXPECT_EQ(param_of({IntArray{1, 2, 3}, std::int64_t{2}, std::int64_t{0}, std::int64_t{5}}), "n");
    EXPECT_EQ(param_of({IntArray{1, 2, 3}, std::int64_t{3}, std::string("0"), std::int64_t{5}}), "a");
    EXPECT_EQ(param_of({IntArray{1, 2, 3}, std::int64_t{3}, std::int64_t{0}, std::int64_t{2'000'000}}), "b");
    EXPECT_EQ(param_of({IntArray(101, 0), std::int64_t{101}, std::int64_t{0}, std::int64_t{5}}), "values");
    EXPECT_EQ(param_of({IntArray{1}}), "");
}

TEST(ProblemModel, StringsMustBePrintableAscii) {
    auto spec = load_problem_bank(testing::bank_dir()).at(2);  // P9
    EXPECT_TRUE(spec.signature.conforms({std::string("pear")}));
    EXPECT_FALSE(spec.signature.conforms({std::string("tab\there")}));
    EXPECT_FALSE(spec.signature.conforms({std::string("caf\xc3\xa9")}));
    EXPECT_FALSE(spec.signature.conforms({std::string(201, 'a')}));
}

TEST(ProblemModel, StatementIncludesFramingAndReminder) {
    auto spec = load_problem_bank(testing::bank_dir()).at(2);
    const auto text = render_statement(spec);
    EXPECT_EQ(text.rfind(spec.framing, 0), 0u);
    EXPECT_NE(text.find("\n\n" + spec.statement + "\n\n"), std::string::npos);
    spec.framing.clear();
    spec.probe_reminder.clear();
    EXPECT_EQ(render_statement(spec), spec.statement);
}

TEST(ProblemModel, PenaltyPolicyBounds) {
    PenaltyPolicy p;
    EXPECT_NO_THROW(p.validate());
    p.increment = 1.5;
    EXPECT_THROW(p.validate(), ConfigError);
}

}  // namespace
}  // namespace probeable
