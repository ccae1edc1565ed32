#include "probeable/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "probeable/error.hpp"
#include "probeable/pattern.hpp"

namespace probeable {

namespace {

std::string option_or(const OracleOptions &options, const std::string &key, std::string fallback) {
    auto it = options.find(key);
    return it == options.end() ? std::move(fallback) : it->second;
}

// The callee only ever sees the first n elements.
std::size_t effective_length(const IntArray &values, std::int64_t n) {
    if (n <= 0) return 0;
    return std::min(values.size(), static_cast<std::size_t>(n));
}

template <typename T>
const T &arg_as(const ProbeArgs &args, std::size_t i, const char *oracle) {
    if (i >= args.size() || !std::holds_alternative<T>(args[i])) {
        throw OracleError(fmt::format("{}: argument {} has the wrong kind", oracle, i + 1));
    }
    return std::get<T>(args[i]);
}

std::string c_int_literal(std::int64_t x) {
    if (x >= INT_MIN && x <= INT_MAX) return std::to_string(x);
    // INT64_MIN cannot be written as a plain negated literal
    if (x == INT64_MIN) return "(-9223372036854775807LL - 1)";
    return std::to_string(x) + "LL";
}

}  // namespace

std::string ref_count_between(const IntArray &values, std::int64_t n, std::int64_t a, std::int64_t b,
                              const OracleOptions &options) {
    const auto lo = std::min(a, b);
    const auto hi = std::max(a, b);
    const bool distinct = option_or(options, "count", "occurrences") == "distinct";
    std::set<std::int64_t> seen;
    std::size_t count = 0;
    const auto len = effective_length(values, n);
    for (std::size_t i = 0; i < len; ++i) {
        const auto x = values[i];
        if (lo < x && x < hi && (!distinct || seen.insert(x).second)) ++count;
    }
    return std::to_string(count);
}

std::string ref_smallest_even(const IntArray &values, std::int64_t n, const OracleOptions &options) {
    const auto len = effective_length(values, n);
    std::optional<std::int64_t> smallest;
    for (std::size_t i = 0; i < len; ++i) {
        if (values[i] % 2 == 0 && (!smallest || values[i] < *smallest)) smallest = values[i];
    }
    if (!smallest) return option_or(options, "sentinel", "NO EVENS");

    const auto base = std::stoll(option_or(options, "index_base", "0"));
    std::vector<std::int64_t> indices;
    for (std::size_t i = len; i-- > 0;) {
        if (values[i] == *smallest) indices.push_back(static_cast<std::int64_t>(i) + base);
    }
    return fmt::format("{}", fmt::join(indices, option_or(options, "separator", " ")));
}

std::string ref_first_vowel(const std::string &s, const OracleOptions &options) {
    bool present[5] = {};
    static constexpr char kVowels[] = "aeiou";
    for (unsigned char c : s) {
        const auto lower = static_cast<char>(std::tolower(c));
        for (int v = 0; v < 5; ++v) {
            if (lower == kVowels[v]) present[v] = true;
        }
    }
    for (int v = 0; v < 5; ++v) {
        if (present[v]) return std::string(1, kVowels[v]);
    }
    return option_or(options, "none", "-");
}

const ProblemSpec *ProblemBank::find(const std::string &id) const noexcept {
    auto it = std::find_if(problems.begin(), problems.end(), [&](const auto &p) { return p.id == id; });
    return it == problems.end() ? nullptr : &*it;
}

const ProblemSpec &ProblemBank::at(const std::string &id) const {
    if (const auto *p = find(id)) return *p;
    throw UnknownProblemError(id);
}

const RunnerProfile &ProblemBank::runner_for(const ProblemSpec &spec) const {
    auto it = runners.find(spec.runner_profile_id);
    if (it == runners.end()) {
        throw ConfigError("problem " + spec.id + ": unknown runner profile '" + spec.runner_profile_id + "'");
    }
    return it->second;
}

ProblemBank load_bank(const std::filesystem::path &dir) {
    ProblemBank bank;
    bank.root = dir;
    bank.problems = load_problem_bank(dir);
    bank.runners = load_runner_profiles(dir);
    for (const auto &p : bank.problems) bank.runner_for(p);
    return bank;
}

OracleRegistry OracleRegistry::with_builtins() {
    OracleRegistry reg;
    reg.register_builtin("count_between", [](const ProbeArgs &args, const OracleOptions &opts) {
        return ref_count_between(arg_as<IntArray>(args, 0, "count_between"),
                                 arg_as<std::int64_t>(args, 1, "count_between"),
                                 arg_as<std::int64_t>(args, 2, "count_between"),
                                 arg_as<std::int64_t>(args, 3, "count_between"), opts);
    });
    reg.register_builtin("smallest_even", [](const ProbeArgs &args, const OracleOptions &opts) {
        return ref_smallest_even(arg_as<IntArray>(args, 0, "smallest_even"),
                                 arg_as<std::int64_t>(args, 1, "smallest_even"), opts);
    });
    reg.register_builtin("first_vowel", [](const ProbeArgs &args, const OracleOptions &opts) {
        return ref_first_vowel(arg_as<std::string>(args, 0, "first_vowel"), opts);
    });
    return reg;
}

void OracleRegistry::register_builtin(const std::string &name, Builtin fn) {
    if (name == "external") throw ConfigError("oracle name 'external' is reserved");
    builtins_[name] = std::move(fn);
}

bool OracleRegistry::resolves(const OracleRef &ref) const noexcept {
    if (ref.name == "external") return sandbox_ != nullptr && ref.options.count("reference") != 0;
    return builtins_.count(ref.name) != 0;
}

std::string OracleRegistry::run(const ProblemBank &bank, const ProblemSpec &spec, const ProbeArgs &args) const {
    if (!resolves(spec.oracle)) {
        throw OracleError("problem " + spec.id + ": oracle '" + spec.oracle.name + "' is not registered");
    }
    if (spec.oracle.name != "external") return builtins_.at(spec.oracle.name)(args, spec.oracle.options);

    const auto &runner = bank.runner_for(spec);
    auto program = compose_program(runner, spec.reference_source, render_invocation(spec, args));
    auto result = sandbox_->execute(runner, program);
    if (result.status != ExecStatus::ok) {
        throw OracleError(fmt::format("problem {}: reference program ended with {}: {}", spec.id,
                                      to_string(result.status), result.stderr_text));
    }
    return normalize_output(result.stdout_text);
}

std::string render_invocation(const ProblemSpec &spec, const ProbeArgs &args) {
    std::string decls;
    std::vector<std::string> exprs;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto &v = args[i];
        if (const auto *x = std::get_if<std::int64_t>(&v)) {
            exprs.push_back(c_int_literal(*x));
        } else if (const auto *arr = std::get_if<IntArray>(&v)) {
            std::vector<std::string> elems;
            for (auto e : *arr) elems.push_back(c_int_literal(e));
            if (elems.empty()) {
                decls += fmt::format("int arg{}[1] = {{0}};\n", i);
            } else {
                decls += fmt::format("int arg{}[] = {{{}}};\n", i, fmt::join(elems, ", "));
            }
            exprs.push_back(fmt::format("arg{}", i));
        } else {
            decls += fmt::format("char arg{}[] = {};\n", i, c_string_literal(std::get<std::string>(v)));
            exprs.push_back(fmt::format("arg{}", i));
        }
    }

    std::string call;
    const auto &tpl = spec.call_template;
    for (std::size_t pos = 0; pos < tpl.size();) {
        if (tpl[pos] == '{') {
            auto close = tpl.find('}', pos);
            if (close != std::string::npos && close > pos + 1 &&
                std::all_of(tpl.begin() + static_cast<long>(pos) + 1, tpl.begin() + static_cast<long>(close),
                            [](unsigned char c) { return std::isdigit(c); })) {
                auto idx = std::stoul(tpl.substr(pos + 1, close - pos - 1));
                if (idx >= exprs.size()) {
                    throw ConfigError(fmt::format("problem {}: call_template refers to argument {{{}}}", spec.id, idx));
                }
                call += exprs[idx];
                pos = close + 1;
                continue;
            }
        }
        call += tpl[pos++];
    }
    return decls + call + "\n";
}

Clarification evaluate_probe(const ProblemBank &bank, const OracleRegistry &oracles, const ProbeRequest &request) {
    const auto &spec = bank.at(request.problem_id);
    spec.signature.validate(request.args);
    return Clarification{oracles.run(bank, spec, request.args), request.args == spec.default_probe};
}

bool mark_default(const ProblemBank &bank, const ProbeRequest &probe) {
    return probe.args == bank.at(probe.problem_id).default_probe;
}

ValidationReport validate_problem(const ProblemBank &bank, const OracleRegistry &oracles, const ProblemSpec &spec) {
    if (!oracles.resolves(spec.oracle)) {
        throw OracleError("problem " + spec.id + ": oracle '" + spec.oracle.name + "' is not registered");
    }
    ValidationReport report;
    report.problem_id = spec.id;
    if (!spec.signature.conforms(spec.default_probe)) report.errors.push_back("default probe violates the signature");
    for (std::size_t i = 0; i < spec.test_suite.size(); ++i) {
        const auto &tc = spec.test_suite[i];
        if (tc.expected.kind == PatternKind::wildcard) continue;
        try {
            spec.signature.validate(tc.input);
        } catch (const SignatureError &e) {
            report.errors.push_back(fmt::format("test {}: {}", i + 1, e.what()));
            continue;
        }
        auto actual = oracles.run(bank, spec, tc.input);
        if (!match_output(actual, tc.expected)) {
            report.mismatches.push_back({i, render_call(spec.function, tc.input), tc.expected.body, actual});
        }
    }
    return report;
}

}  // namespace probeable
