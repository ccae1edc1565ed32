#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "probeable/pattern.hpp"
#include "probeable/value.hpp"

namespace probeable {

inline constexpr int kProblemSchemaVersion = 1;

inline constexpr std::int64_t kDefaultIntMin = -1'000'000;
inline constexpr std::int64_t kDefaultIntMax = 1'000'000;
inline constexpr std::size_t kDefaultArrayMaxLength = 100;
inline constexpr std::size_t kDefaultStringMaxLength = 200;

struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::integer;
    // Bounds on int values (also applied to each array element).
    std::int64_t min = kDefaultIntMin;
    std::int64_t max = kDefaultIntMax;
    // Upper bound on array or string length; unused for ints.
    std::size_t max_length = 0;
    // For an int parameter: it must equal the length of the named array
    // parameter ("n" in CountBetween(values, n, a, b)).
    std::optional<std::string> length_of;

    bool operator==(const ParamSpec &) const = default;
};

struct ProbeSignature {
    std::vector<ParamSpec> params;

    // Throws SignatureError naming the first offending parameter.
    void validate(const ProbeArgs &args) const;
    bool conforms(const ProbeArgs &args) const noexcept;

    bool operator==(const ProbeSignature &) const = default;
};

struct TestCase {
    ProbeArgs input;
    OutputPattern expected;
    bool visible_on_failure = true;

    bool operator==(const TestCase &) const = default;
};

struct PenaltyPolicy {
    double increment = 0.05;
    double floor = 0.0;
    double probe_cost = 0.0;
    // When false, failing submissions after the first pass are not penalized.
    bool count_after_pass = true;

    void validate() const;
    bool operator==(const PenaltyPolicy &) const = default;
};

using OracleOptions = std::map<std::string, std::string>;

struct OracleRef {
    std::string name;
    OracleOptions options;

    bool operator==(const OracleRef &) const = default;
};

struct ProblemSpec {
    std::string id;
    std::string statement;
    std::string framing;
    std::string probe_reminder;
    // Name the student implements; used to render inputs in call syntax.
    std::string function;
    ProbeSignature signature;
    ProbeArgs default_probe;
    OracleRef oracle;
    // C statement invoking the student function; {0}, {1}, ... are replaced
    // by argument expressions.
    std::string call_template;
    std::vector<TestCase> test_suite;
    PenaltyPolicy penalty;
    std::string runner_profile_id;
    // Reference program text for the "external" oracle (loaded from the
    // bank, relative path kept in oracle.options["reference"]).
    std::string reference_source;

    // Checks the invariants that do not need an oracle.
    void check_invariants() const;
    bool operator==(const ProblemSpec &) const = default;
};

nlohmann::json problem_to_json(const ProblemSpec &spec);
// `location` is used in ParseError messages.
ProblemSpec problem_from_json(const nlohmann::json &j, const std::string &location);

// Reads one `<id>.problem` document. Relative reference paths resolve
// against `bank_root`.
ProblemSpec load_problem_file(const std::filesystem::path &file,
                              const std::filesystem::path &bank_root);

// All `*.problem` documents under `dir` (non-recursive), sorted by id.
std::vector<ProblemSpec> load_problem_bank(const std::filesystem::path &dir);

// The statement shown to students: framing, statement and probe reminder,
// each separated by a blank line; empty parts are skipped.
std::string render_statement(const ProblemSpec &spec);

}  // namespace probeable
