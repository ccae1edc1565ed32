#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "probeable/attempt_log.hpp"
#include "probeable/oracle.hpp"
#include "probeable/sandbox.hpp"

namespace probeable {

struct Submission {
    std::string student_id;
    std::string problem_id;
    std::string source;
    Timestamp submitted_at{};
};

enum class Verdict { pass, fail };

const char *to_string(Verdict v) noexcept;

// The one failing test a student gets to see.
struct FirstFailure {
    std::size_t test_index = 0;
    std::string input;  // call syntax, e.g. CountBetween({0, 5, 3}, 3, 0, 5)
    std::string expected;
    std::string actual;
    ExecStatus status = ExecStatus::ok;

    bool operator==(const FirstFailure &) const = default;
};

struct SubmissionOutcome {
    Verdict verdict = Verdict::fail;
    std::optional<FirstFailure> first_failure;
    std::size_t tests_passed = 0;
    std::size_t tests_total = 0;
};

struct GradeOptions {
    // Keep running after the first failure (instructor diagnostics). Only the
    // earliest failure is ever reported.
    bool run_all = false;
};

// Runs the suite in order. A compile error fails every remaining test.
// Throws SignatureError for an empty source and ToolchainMissingError when
// the runner cannot start; neither is a graded failure.
SubmissionOutcome grade_submission(const ProblemBank &bank, const Sandbox &sandbox,
                                   const Submission &sub, GradeOptions options = {});

struct PenaltyState {
    std::size_t failing_count = 0;
    PenaltyPolicy policy;
};

// max(floor, 1 - increment * failing_count), rounded to 1e-12 so that
// decimal policies give exact decimal scores.
double compute_final_score(const PenaltyState &state);

// Counts the F events of one (student, problem), honouring
// policy.count_after_pass.
PenaltyState penalty_state_for(const std::vector<AttemptEvent> &events,
                               const PenaltyPolicy &policy);

// Stores the submission and its outcome as a payload and appends F or S.
AttemptEvent record_outcome(AttemptStore &store, const Submission &sub,
                            const SubmissionOutcome &outcome);

nlohmann::json outcome_to_json(const SubmissionOutcome &outcome);

}  // namespace probeable
