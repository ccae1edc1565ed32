// probeable: operator tool for the probeable-problems platform.
//
//   probeable validate --bank DIR
//   probeable serve    --bank DIR --log FILE --roster CSV --tokens CSV [--bind HOST:PORT]
//   probeable simulate --out LOG --roster CSV [--seed N] [--config JSON] [--students N]
//   probeable analyze  --log LOG --roster CSV --out DIR [--ratio-threshold X] [--include-defaults]
//   probeable token    --roster CSV --out CSV [--instructor ID]...
//
// Exit status: 0 success, 1 failure (invalid bank, schema violation, ...),
// 2 unreadable input or bad usage.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "probeable/analytics.hpp"
#include "probeable/error.hpp"
#include "probeable/oracle.hpp"
#include "probeable/service.hpp"
#include "probeable/simulate.hpp"

namespace fs = std::filesystem;
using namespace probeable;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUnreadable = 2;

struct UnreadableInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_dir(const std::string &path, const char *what) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) throw UnreadableInput(fmt::format("{} '{}' is not a readable directory", what, path));
}

void require_file(const std::string &path, const char *what) {
    std::ifstream in(path);
    if (!in) throw UnreadableInput(fmt::format("{} '{}' is not readable", what, path));
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
}

int cmd_validate(const std::string &bank_path) {
    require_dir(bank_path, "bank");
    auto bank = load_bank(bank_path);
    Sandbox sandbox(1);
    auto oracles = OracleRegistry::with_builtins();
    oracles.attach_sandbox(&sandbox);

    bool all_ok = true;
    for (const auto &spec : bank.problems) {
        auto report = validate_problem(bank, oracles, spec);
        if (report.ok()) {
            fmt::print("{}: ok ({} tests)\n", spec.id, spec.test_suite.size());
            continue;
        }
        all_ok = false;
        fmt::print("{}: {} mismatch(es), {} error(s)\n", spec.id, report.mismatches.size(), report.errors.size());
        for (const auto &m : report.mismatches) {
            fmt::print("  test {}: {} expected \"{}\" actual \"{}\"\n", m.test_index + 1, m.input, m.expected, m.actual);
        }
        for (const auto &e : report.errors) fmt::print("  {}\n", e);
    }
    fmt::print("{} problem(s) checked\n", bank.problems.size());
    return all_ok ? kExitOk : kExitFailure;
}

Service *g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

int cmd_serve(const std::string &bank_path, const std::string &log_path, const std::string &roster_path,
              const std::string &tokens_path, const std::string &bind, int concurrency) {
    require_dir(bank_path, "bank");
    require_file(roster_path, "roster");
    require_file(tokens_path, "token file");
    auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw UnreadableInput("--bind must be HOST:PORT");
    const auto host = bind.substr(0, colon);
    const int port = std::stoi(bind.substr(colon + 1));

    auto bank = load_bank(bank_path);
    auto roster = Roster::load(roster_path);
    auto sessions = SessionRegistry::load(tokens_path);
    Sandbox sandbox(concurrency);
    auto oracles = OracleRegistry::with_builtins();
    oracles.attach_sandbox(&sandbox);
    AttemptStore store(log_path);

    Service service(bank, oracles, sandbox, store, sessions, roster);
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    fmt::print("serving {} problem(s) on {}:{}\n", bank.problems.size(), host, port);
    std::fflush(stdout);
    service.run(host, port);
    g_service = nullptr;
    return kExitOk;
}

int cmd_simulate(const std::string &config_path, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> students, const std::string &out_log, const std::string &out_roster) {
    auto config = SimulationConfig::defaults();
    if (!config_path.empty()) {
        require_file(config_path, "config");
        std::ifstream in(config_path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error &e) {
            throw ConfigError(config_path + ": " + e.what());
        }
        config = simulation_config_from_json(j);
    }
    if (seed) config.seed = *seed;
    if (students) {
        for (auto &c : config.categories) c.students = *students;
    }
    auto out = simulate(config);
    write_text(out_log, out.log);
    write_text(out_roster, out.roster.to_csv());
    fmt::print("wrote {} students to {} and {}\n", out.roster.records().size(), out_log, out_roster);
    return kExitOk;
}

int cmd_analyze(const std::string &log_path, const std::string &roster_path, const std::string &out_dir,
                const CohortFilter &filter, const std::string &format) {
    require_file(log_path, "log");
    require_file(roster_path, "roster");
    const auto fmt_kind = export_format_from_string(format);
    // Replaying through the store surfaces schema and sequence violations.
    const auto events = AttemptStore::replay(log_path)->snapshot();
    auto roster = Roster::load(roster_path);
    auto report = build_report(events, roster, filter);
    auto docs = export_report(report, fmt_kind);
    if (fmt_kind == ExportFormat::csv) {
        write_text(fs::path(out_dir) / "cdf.csv", docs.cdf_csv);
        write_text(fs::path(out_dir) / "ratio.csv", docs.ratio_csv);
    } else {
        write_text(fs::path(out_dir) / "report.json", docs.json);
    }
    fmt::print("problem,raw,included,excluded_bare_s,excluded_no_code,successful,ratio_outliers\n");
    for (const auto &t : report.problem_totals) {
        fmt::print("{},{},{},{},{},{},{}\n", t.problem_id, t.raw_attempts, t.included, t.excluded_bare_s,
                   t.excluded_no_code, t.successful, t.ratio_outliers);
    }
    return kExitOk;
}

int cmd_token(const std::string &roster_path, const std::string &out_path, const std::vector<std::string> &instructors,
              int ttl_days) {
    require_file(roster_path, "roster");
    auto roster = Roster::load(roster_path);
    SessionRegistry sessions;
    const auto ttl = std::chrono::hours(24 * ttl_days);
    for (const auto &[id, rec] : roster.records()) sessions.mint(id, Role::student, ttl);
    for (const auto &id : instructors) sessions.mint(id, Role::instructor, ttl);
    write_text(out_path, sessions.to_csv());
    fmt::print("minted {} token(s) into {}\n", roster.records().size() + instructors.size(), out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Probeable problems: validate banks, serve the platform, simulate cohorts, analyze logs"};
    app.require_subcommand(1);

    std::string bank = "bank", log_path, roster_path, tokens_path, out, bind = "127.0.0.1:8080", config_path,
                format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> students;
    double ratio_threshold = 35.0;
    bool include_defaults = false, keep_bare_s = false, keep_no_code = false;
    int concurrency = 4, ttl_days = 120;
    std::vector<std::string> instructors;

    auto *validate = app.add_subcommand("validate", "Check every test expectation against the reference oracle");
    validate->add_option("--bank", bank, "Problem bank directory")->envname("PROBEABLE_BANK");

    auto *serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--bank", bank, "Problem bank directory")->envname("PROBEABLE_BANK");
    serve->add_option("--log", log_path, "Attempt log file (created if absent)")->required()->envname("PROBEABLE_LOG");
    serve->add_option("--roster", roster_path, "Roster CSV")->required()->envname("PROBEABLE_ROSTER");
    serve->add_option("--tokens", tokens_path, "Session token CSV from `probeable token`")
        ->required()
        ->envname("PROBEABLE_TOKENS");
    serve->add_option("--bind", bind, "HOST:PORT")->envname("PROBEABLE_BIND");
    serve->add_option("--sandbox-concurrency", concurrency, "Simultaneous child processes")
        ->check(CLI::Range(1, 256))
        ->envname("PROBEABLE_SANDBOX_CONCURRENCY");

    auto *sim = app.add_subcommand("simulate", "Generate a synthetic attempt log and roster");
    sim->add_option("--config", config_path, "Simulation config JSON");
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--students", students, "Students per grade category");
    sim->add_option("--out", out, "Output log file")->required();
    sim->add_option("--roster", roster_path, "Output roster CSV")->required();

    auto *analyze = app.add_subcommand("analyze", "Build the cohort report and export it");
    analyze->add_option("--log", log_path, "Attempt log file")->required();
    analyze->add_option("--roster", roster_path, "Roster CSV")->required();
    analyze->add_option("--out", out, "Output directory")->required();
    analyze->add_option("--ratio-threshold", ratio_threshold, "Probe/code ratio above which attempts are outliers");
    analyze->add_flag("--include-defaults", include_defaults, "Count default probes");
    analyze->add_flag("--keep-bare-s", keep_bare_s, "Do not exclude attempts that are a single S");
    analyze->add_flag("--keep-no-code", keep_no_code, "Do not exclude attempts without code submissions");
    analyze->add_option("--format", format, "csv or structured-text");

    auto *token = app.add_subcommand("token", "Mint bearer tokens for every roster student");
    token->add_option("--roster", roster_path, "Roster CSV")->required();
    token->add_option("--out", out, "Token CSV to write")->required();
    token->add_option("--instructor", instructors, "Also mint an instructor token for this id");
    token->add_option("--ttl-days", ttl_days, "Token lifetime")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUnreadable;
    }

    try {
        if (*validate) return cmd_validate(bank);
        if (*serve) return cmd_serve(bank, log_path, roster_path, tokens_path, bind, concurrency);
        if (*sim) return cmd_simulate(config_path, seed, students, out, roster_path);
        if (*analyze) {
            CohortFilter filter;
            filter.ratio_outlier_threshold = ratio_threshold;
            filter.exclude_default_probes = !include_defaults;
            filter.exclude_bare_s = !keep_bare_s;
            filter.exclude_no_code = !keep_no_code;
            return cmd_analyze(log_path, roster_path, out, filter, format);
        }
        if (*token) return cmd_token(roster_path, out, instructors, ttl_days);
    } catch (const UnreadableInput &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnreadable;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
