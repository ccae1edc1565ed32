#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "probeable/problem.hpp"
#include "probeable/sandbox.hpp"
#include "probeable/value.hpp"

namespace probeable {

// Reference solutions for the bundled problems. Output is the canonical
// clarification text, without a trailing newline.

// |{ i : min(a,b) < values[i] < max(a,b) }|. With options["count"] ==
// "distinct", equal qualifying values are counted once.
std::string ref_count_between(const IntArray &values, std::int64_t n, std::int64_t a,
                              std::int64_t b, const OracleOptions &options = {});

// Indices of the minimum even value, highest index first. Options:
// "sentinel" (default "NO EVENS"), "separator" (default " "),
// "index_base" (default "0").
std::string ref_smallest_even(const IntArray &values, std::int64_t n,
                              const OracleOptions &options = {});

// Earliest of a, e, i, o, u (in that order) present anywhere in `s`,
// case-insensitively; options["none"] (default "-") when no vowel appears.
std::string ref_first_vowel(const std::string &s, const OracleOptions &options = {});

struct Clarification {
    std::string output;
    bool is_default = false;

    bool operator==(const Clarification &) const = default;
};

// Problems plus the runner profiles that live next to them. Immutable after
// load.
struct ProblemBank {
    std::filesystem::path root;
    std::vector<ProblemSpec> problems;
    std::map<std::string, RunnerProfile> runners;

    const ProblemSpec *find(const std::string &id) const noexcept;
    const ProblemSpec &at(const std::string &id) const;  // UnknownProblemError
    const RunnerProfile &runner_for(const ProblemSpec &spec) const;
};

ProblemBank load_bank(const std::filesystem::path &dir);

// Maps oracle names to implementations. The name "external" is reserved: it
// runs the problem's reference_source through the sandbox.
class OracleRegistry {
public:
    using Builtin = std::function<std::string(const ProbeArgs &, const OracleOptions &)>;

    // count_between, smallest_even, first_vowel.
    static OracleRegistry with_builtins();

    void register_builtin(const std::string &name, Builtin fn);
    // Needed only for external oracles; not owned.
    void attach_sandbox(const Sandbox *sandbox) noexcept { sandbox_ = sandbox; }

    bool resolves(const OracleRef &ref) const noexcept;

    // Args must already conform to the problem's signature. Throws
    // OracleError for unresolvable refs or failed external runs.
    std::string run(const ProblemBank &bank, const ProblemSpec &spec, const ProbeArgs &args) const;

private:
    std::map<std::string, Builtin> builtins_;
    const Sandbox *sandbox_ = nullptr;
};

// Declarations plus the rendered call_template, i.e. the body that goes in
// place of {TEST_INVOCATION}.
std::string render_invocation(const ProblemSpec &spec, const ProbeArgs &args);

// Validates args against the problem signature, then asks the oracle.
// Throws UnknownProblemError, SignatureError.
Clarification evaluate_probe(const ProblemBank &bank, const OracleRegistry &oracles,
                             const ProbeRequest &request);

// True iff args structurally equal the problem's default probe.
bool mark_default(const ProblemBank &bank, const ProbeRequest &probe);

struct ValidationMismatch {
    std::size_t test_index = 0;
    std::string input;  // call syntax
    std::string expected;
    std::string actual;
};

struct ValidationReport {
    std::string problem_id;
    std::vector<ValidationMismatch> mismatches;
    // Signature violations in test inputs or the default probe.
    std::vector<std::string> errors;

    bool ok() const noexcept { return mismatches.empty() && errors.empty(); }
};

// Every literal test expectation must equal the oracle output on its input.
// Wildcard tests never mismatch; regex tests must match the oracle output.
// Throws OracleError when the oracle ref does not resolve.
ValidationReport validate_problem(const ProblemBank &bank, const OracleRegistry &oracles,
                                  const ProblemSpec &spec);

}  // namespace probeable
