#include "probeable/grading.hpp"

#include <algorithm>
#include <cmath>

#include "probeable/error.hpp"
#include "probeable/pattern.hpp"

namespace probeable {

using nlohmann::json;

const char *to_string(Verdict v) noexcept { return v == Verdict::pass ? "pass" : "fail"; }

SubmissionOutcome grade_submission(const ProblemBank &bank, const Sandbox &sandbox, const Submission &sub,
                                   GradeOptions options) {
    if (sub.source.find_first_not_of(" \t\r\n") == std::string::npos) throw Error("submission source is empty");
    const auto &spec = bank.at(sub.problem_id);
    const auto &runner = bank.runner_for(spec);

    SubmissionOutcome outcome;
    outcome.tests_total = spec.test_suite.size();
    for (std::size_t i = 0; i < spec.test_suite.size(); ++i) {
        const auto &tc = spec.test_suite[i];
        auto program = compose_program(runner, sub.source, render_invocation(spec, tc.input));
        auto result = sandbox.execute(runner, program);

        const bool passed = result.status == ExecStatus::ok && match_output(result.stdout_text, tc.expected);
        if (passed) {
            ++outcome.tests_passed;
            continue;
        }
        if (!outcome.first_failure) {
            FirstFailure ff;
            ff.test_index = i;
            ff.status = result.status;
            if (tc.visible_on_failure) {
                ff.input = render_call(spec.function, tc.input);
                ff.expected = tc.expected.body;
                ff.actual = result.status == ExecStatus::compile_error ? result.stderr_text
                                                                       : normalize_output(result.stdout_text);
            } else {
                ff.input = ff.expected = ff.actual = "(hidden)";
            }
            outcome.first_failure = std::move(ff);
        }
        // the same source fails to compile for every remaining test
        if (!options.run_all || result.status == ExecStatus::compile_error) break;
    }
    outcome.verdict = outcome.tests_passed == outcome.tests_total ? Verdict::pass : Verdict::fail;
    return outcome;
}

double compute_final_score(const PenaltyState &state) {
    const double raw = 1.0 - state.policy.increment * static_cast<double>(state.failing_count);
    const double clamped = std::clamp(raw, state.policy.floor, 1.0);
    return std::round(clamped * 1e12) / 1e12;
}

PenaltyState penalty_state_for(const std::vector<AttemptEvent> &events, const PenaltyPolicy &policy) {
    std::vector<const AttemptEvent *> ordered;
    for (const auto &e : events) ordered.push_back(&e);
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto *a, const auto *b) { return a->seq_no < b->seq_no; });
    PenaltyState state{0, policy};
    for (const auto *e : ordered) {
        if (e->kind == EventKind::success && !policy.count_after_pass) break;
        if (e->kind == EventKind::fail) ++state.failing_count;
    }
    return state;
}

json outcome_to_json(const SubmissionOutcome &outcome) {
    json j{{"verdict", to_string(outcome.verdict)},
           {"tests_passed", outcome.tests_passed},
           {"tests_total", outcome.tests_total},
           {"first_failure", nullptr}};
    if (outcome.first_failure) {
        const auto &ff = *outcome.first_failure;
        j["first_failure"] = json{{"test_index", ff.test_index},
                                  {"input", ff.input},
                                  {"expected", ff.expected},
                                  {"actual", ff.actual},
                                  {"status", to_string(ff.status)}};
    }
    return j;
}

AttemptEvent record_outcome(AttemptStore &store, const Submission &sub, const SubmissionOutcome &outcome) {
    json body{{"type", "submission"}, {"source", sub.source}, {"outcome", outcome_to_json(outcome)}};
    AttemptEvent event;
    event.student_id = sub.student_id;
    event.problem_id = sub.problem_id;
    event.at = sub.submitted_at.time_since_epoch().count() == 0 ? now_utc() : sub.submitted_at;
    event.kind = outcome.verdict == Verdict::pass ? EventKind::success : EventKind::fail;
    event.payload_ref = store.put_payload(body);
    event.seq_no = store.append_event(event);
    return event;
}

}  // namespace probeable
