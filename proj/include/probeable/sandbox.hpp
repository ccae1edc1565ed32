#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace probeable {

inline constexpr std::string_view kStudentSourcePlaceholder = "{STUDENT_SOURCE}";
inline constexpr std::string_view kTestInvocationPlaceholder = "{TEST_INVOCATION}";

struct ResourceLimits {
    double wall_clock_seconds = 5.0;
    std::size_t max_output_bytes = 64 * 1024;
    std::size_t max_processes = 1;
    // Applies to the compile step only.
    double compile_wall_clock_seconds = 30.0;

    void validate() const;
    bool operator==(const ResourceLimits &) const = default;
};

// How to turn a student function plus one invocation into a runnable
// program. Command templates are split on whitespace; each token may use
// {WORKDIR}, {SRCFILE} and {BINFILE}.
struct RunnerProfile {
    std::string id;
    std::string compose_template;
    std::string source_name = "main.c";
    std::string binary_name = "main";
    std::string compile_cmd;  // empty: interpreted language, no compile step
    std::string run_cmd;
    ResourceLimits limits;

    void validate() const;
    bool operator==(const RunnerProfile &) const = default;
};

nlohmann::json runner_to_json(const RunnerProfile &profile);
RunnerProfile runner_from_json(const nlohmann::json &j, const std::string &location);
// All `*.runner` documents in `dir`, keyed by id.
std::map<std::string, RunnerProfile> load_runner_profiles(const std::filesystem::path &dir);

// Substitutes both placeholders exactly once. Throws MissingPlaceholderError
// when either is absent or repeated.
std::string compose_program(const RunnerProfile &profile, std::string_view student_source,
                            std::string_view invocation);

enum class ExecStatus { ok, compile_error, timeout, runtime_error, output_truncated };

const char *to_string(ExecStatus status) noexcept;

struct ExecutionResult {
    ExecStatus status = ExecStatus::ok;
    std::string stdout_text;
    std::string stderr_text;
    std::chrono::duration<double> duration{0};
    int exit_code = 0;
};

// Runs composed programs as child processes, each in its own scratch
// directory that is removed afterwards. A counting semaphore bounds the
// number of simultaneous executions.
class Sandbox {
public:
    explicit Sandbox(std::ptrdiff_t max_concurrent = 4);

    Sandbox(const Sandbox &) = delete;
    Sandbox &operator=(const Sandbox &) = delete;

    // Throws ToolchainMissingError when a command cannot be started.
    ExecutionResult execute(const RunnerProfile &profile, std::string_view program) const;

    std::ptrdiff_t max_concurrent() const noexcept { return max_concurrent_; }

private:
    std::ptrdiff_t max_concurrent_;
    mutable std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace probeable
