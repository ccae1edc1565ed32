#include "probeable/problem.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "probeable/error.hpp"

namespace probeable {

namespace {

using nlohmann::json;

bool printable_ascii(const std::string &s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= 0x20 && c <= 0x7e; });
}

std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError(p.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Byte offset -> "file:line:col".
std::string location_at(const std::string &file, const std::string &text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return fmt::format("{}:{}:{}", file, line, col);
}

json pattern_to_json(const OutputPattern &p) {
    return json{{"kind", to_string(p.kind)}, {"body", p.body}};
}

OutputPattern pattern_from_json(const json &j) {
    if (j.is_string()) return OutputPattern::literal(j.get<std::string>());
    auto kind = j.at("kind").get<std::string>();
    if (kind == "wildcard") return OutputPattern::wildcard();
    if (kind == "literal") return OutputPattern::literal(j.at("body").get<std::string>());
    if (kind == "regex") return OutputPattern::regex(j.at("body").get<std::string>());
    throw ConfigError("unknown expected-output kind '" + kind + "'");
}

json param_to_json(const ParamSpec &p) {
    json j{{"name", p.name}, {"kind", to_string(p.kind)}};
    if (p.kind != ParamKind::string) {
        j["min"] = p.min;
        j["max"] = p.max;
    }
    if (p.kind != ParamKind::integer) j["max_length"] = p.max_length;
    if (p.length_of) j["length_of"] = *p.length_of;
    return j;
}

ParamSpec param_from_json(const json &j) {
    ParamSpec p;
    p.name = j.at("name").get<std::string>();
    auto kind = param_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw ConfigError("parameter '" + p.name + "': unknown kind");
    p.kind = *kind;
    p.min = j.value("min", kDefaultIntMin);
    p.max = j.value("max", kDefaultIntMax);
    if (p.kind == ParamKind::int_array) p.max_length = j.value("max_length", kDefaultArrayMaxLength);
    if (p.kind == ParamKind::string) p.max_length = j.value("max_length", kDefaultStringMaxLength);
    if (j.contains("length_of")) p.length_of = j.at("length_of").get<std::string>();
    return p;
}

void check_signature_shape(const ProbeSignature &sig) {
    std::set<std::string> names;
    for (const auto &p : sig.params) {
        if (p.name.empty()) throw ConfigError("parameter with empty name");
        if (!names.insert(p.name).second) throw ConfigError("duplicate parameter '" + p.name + "'");
        if (p.min > p.max) throw ConfigError("parameter '" + p.name + "': min > max");
        if (p.kind != ParamKind::integer && p.max_length == 0)
            throw ConfigError("parameter '" + p.name + "': max_length must be positive");
        if (p.length_of) {
            if (p.kind != ParamKind::integer)
                throw ConfigError("parameter '" + p.name + "': length_of requires kind int");
            auto it = std::find_if(sig.params.begin(), sig.params.end(),
                                   [&](const ParamSpec &q) { return q.name == *p.length_of; });
            if (it == sig.params.end() || it->kind != ParamKind::int_array)
                throw ConfigError("parameter '" + p.name + "': length_of must name an int-array parameter");
        }
    }
}

}  // namespace

void ProbeSignature::validate(const ProbeArgs &args) const {
    if (args.size() != params.size()) {
        throw SignatureError("", fmt::format("expected {} arguments, got {}", params.size(), args.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto &p = params[i];
        const auto &v = args[i];
        if (kind_of(v) != p.kind) {
            throw SignatureError(p.name, fmt::format("expected {}, got {}", to_string(p.kind),
                                                     to_string(kind_of(v))));
        }
        auto check_int = [&](std::int64_t x) {
            if (x < p.min || x > p.max)
                throw SignatureError(p.name, fmt::format("value {} outside [{}, {}]", x, p.min, p.max));
        };
        switch (p.kind) {
            case ParamKind::integer: check_int(std::get<std::int64_t>(v)); break;
            case ParamKind::int_array: {
                const auto &arr = std::get<IntArray>(v);
                if (arr.size() > p.max_length)
                    throw SignatureError(p.name, fmt::format("length {} exceeds {}", arr.size(), p.max_length));
                for (auto x : arr) check_int(x);
                break;
            }
            case ParamKind::string: {
                const auto &s = std::get<std::string>(v);
                if (s.size() > p.max_length)
                    throw SignatureError(p.name, fmt::format("length {} exceeds {}", s.size(), p.max_length));
                if (!printable_ascii(s))
                    throw SignatureError(p.name, "only printable 7-bit characters are allowed");
                break;
            }
        }
        if (p.length_of) {
            auto it = std::find_if(params.begin(), params.end(),
                                   [&](const ParamSpec &q) { return q.name == *p.length_of; });
            if (it != params.end()) {
                const auto &arr = std::get<IntArray>(args[static_cast<std::size_t>(it - params.begin())]);
                if (std::get<std::int64_t>(v) != static_cast<std::int64_t>(arr.size())) {
                    throw SignatureError(p.name, fmt::format("must equal the length of '{}' ({})",
                                                             *p.length_of, arr.size()));
                }
            }
        }
    }
}

bool ProbeSignature::conforms(const ProbeArgs &args) const noexcept {
    try {
        validate(args);
        return true;
    } catch (const SignatureError &) {
        return false;
    }
}

void PenaltyPolicy::validate() const {
    if (!(increment >= 0 && increment <= 1)) throw ConfigError("penalty increment must be in [0, 1]");
    if (!(floor >= 0 && floor <= 1)) throw ConfigError("penalty floor must be in [0, 1]");
    if (!(probe_cost >= 0 && probe_cost <= 1)) throw ConfigError("probe_cost must be in [0, 1]");
}

void ProblemSpec::check_invariants() const {
    if (id.empty()) throw ConfigError("problem id is empty");
    if (function.empty()) throw ConfigError("function name is empty");
    if (oracle.name.empty()) throw ConfigError("oracle ref is empty");
    if (runner_profile_id.empty()) throw ConfigError("runner_profile is empty");
    check_signature_shape(signature);
    penalty.validate();
    try {
        signature.validate(default_probe);
    } catch (const SignatureError &e) {
        throw SignatureError(e.param(), std::string("default_probe: ") + e.what());
    }
    if (test_suite.empty()) throw ConfigError("test suite is empty");
    for (std::size_t i = 0; i < test_suite.size(); ++i) {
        try {
            signature.validate(test_suite[i].input);
        } catch (const SignatureError &e) {
            throw SignatureError(e.param(), fmt::format("test {}: {}", i + 1, e.what()));
        }
    }
}

json problem_to_json(const ProblemSpec &spec) {
    json sig = json::array();
    for (const auto &p : spec.signature.params) sig.push_back(param_to_json(p));
    json tests = json::array();
    for (const auto &t : spec.test_suite) {
        tests.push_back(json{{"input", args_to_json(t.input)},
                             {"expected", pattern_to_json(t.expected)},
                             {"visible_on_failure", t.visible_on_failure}});
    }
    return json{
        {"schema_version", kProblemSchemaVersion},
        {"id", spec.id},
        {"framing", spec.framing},
        {"statement", spec.statement},
        {"probe_reminder", spec.probe_reminder},
        {"function", spec.function},
        {"signature", sig},
        {"default_probe", args_to_json(spec.default_probe)},
        {"oracle", json{{"ref", spec.oracle.name}, {"options", spec.oracle.options}}},
        {"call_template", spec.call_template},
        {"tests", tests},
        {"penalty", json{{"increment", spec.penalty.increment},
                         {"floor", spec.penalty.floor},
                         {"probe_cost", spec.penalty.probe_cost},
                         {"count_after_pass", spec.penalty.count_after_pass}}},
        {"runner_profile", spec.runner_profile_id},
    };
}

ProblemSpec problem_from_json(const json &j, const std::string &location) {
    ProblemSpec spec;
    try {
        auto version = j.at("schema_version").get<int>();
        if (version != kProblemSchemaVersion)
            throw ConfigError(fmt::format("unsupported schema_version {}", version));
        spec.id = j.at("id").get<std::string>();
        spec.framing = j.value("framing", "");
        spec.statement = j.at("statement").get<std::string>();
        spec.probe_reminder = j.value("probe_reminder", "");
        spec.function = j.at("function").get<std::string>();
        for (const auto &p : j.at("signature")) spec.signature.params.push_back(param_from_json(p));
        spec.default_probe = args_from_json(j.at("default_probe"));
        const auto &o = j.at("oracle");
        spec.oracle.name = o.at("ref").get<std::string>();
        if (o.contains("options")) spec.oracle.options = o.at("options").get<OracleOptions>();
        spec.call_template = j.value("call_template", "");
        for (const auto &t : j.at("tests")) {
            TestCase tc;
            tc.input = args_from_json(t.at("input"));
            tc.expected = pattern_from_json(t.at("expected"));
            tc.visible_on_failure = t.value("visible_on_failure", true);
            spec.test_suite.push_back(std::move(tc));
        }
        if (j.contains("penalty")) {
            const auto &p = j.at("penalty");
            spec.penalty.increment = p.value("increment", spec.penalty.increment);
            spec.penalty.floor = p.value("floor", spec.penalty.floor);
            spec.penalty.probe_cost = p.value("probe_cost", spec.penalty.probe_cost);
            spec.penalty.count_after_pass = p.value("count_after_pass", spec.penalty.count_after_pass);
        }
        spec.runner_profile_id = j.at("runner_profile").get<std::string>();
        spec.check_invariants();
    } catch (const SignatureError &e) {
        throw SignatureError(e.param(), location + ": " + e.what());
    } catch (const json::exception &e) {
        throw ParseError(location, e.what());
    } catch (const ConfigError &e) {
        throw ParseError(location, e.what());
    }
    return spec;
}

ProblemSpec load_problem_file(const std::filesystem::path &file, const std::filesystem::path &bank_root) {
    auto text = read_file(file);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(location_at(file.string(), text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    auto spec = problem_from_json(j, file.string());
    if (auto it = spec.oracle.options.find("reference"); it != spec.oracle.options.end()) {
        spec.reference_source = read_file(bank_root / it->second);
    }
    return spec;
}

std::vector<ProblemSpec> load_problem_bank(const std::filesystem::path &dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error("problem bank '" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".problem") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ProblemSpec> specs;
    std::set<std::string> ids;
    for (const auto &f : files) {
        auto spec = load_problem_file(f, dir);
        if (!ids.insert(spec.id).second) throw DuplicateIdError(spec.id);
        specs.push_back(std::move(spec));
    }
    std::sort(specs.begin(), specs.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
    return specs;
}

std::string render_statement(const ProblemSpec &spec) {
    std::string out;
    for (const auto *part : {&spec.framing, &spec.statement, &spec.probe_reminder}) {
        if (part->empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += *part;
    }
    return out;
}

}  // namespace probeable
