#include "probeable/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "probeable/error.hpp"

namespace probeable {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
    return n;
}

void replace_all(std::string &s, std::string_view from, const std::string &to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd &&o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Fd &operator=(Fd &&o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    ~Fd() { reset(); }
    int get() const noexcept { return fd_; }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

struct Pipe {
    Fd read, write;
};

Pipe make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(std::string("pipe2: ") + std::strerror(errno));
    return {Fd(fds[0]), Fd(fds[1])};
}

// Scratch directory removed on scope exit.
class ScratchDir {
public:
    ScratchDir() {
        auto tmpl = (fs::temp_directory_path() / "probeable-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw Error(std::string("mkdtemp: ") + std::strerror(errno));
        path_ = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir &) = delete;
    ScratchDir &operator=(const ScratchDir &) = delete;
    const fs::path &path() const noexcept { return path_; }

private:
    fs::path path_;
};

struct ProcessLimits {
    std::chrono::duration<double> wall_clock;
    std::size_t max_stdout;
    std::size_t max_processes;  // 0: no limit
    bool cpu_limit;
};

struct ProcessResult {
    bool exec_failed = false;
    int exec_errno = 0;
    bool timed_out = false;
    bool truncated = false;
    int exit_code = 0;
    int term_signal = 0;
    std::string out, err;
    std::chrono::duration<double> duration{0};
};

constexpr std::size_t kMaxStderr = 64 * 1024;

std::vector<std::string> expand_command(const std::string &tpl, const fs::path &workdir, const RunnerProfile &profile) {
    std::vector<std::string> argv;
    std::istringstream in(tpl);
    for (std::string tok; in >> tok;) {
        replace_all(tok, "{WORKDIR}", workdir.string());
        replace_all(tok, "{SRCFILE}", (workdir / profile.source_name).string());
        replace_all(tok, "{BINFILE}", (workdir / profile.binary_name).string());
        argv.push_back(std::move(tok));
    }
    return argv;
}

// Runs between fork and exec: no allocation.
[[noreturn]] void child_exec(char *const *argv, const char *workdir, const ProcessLimits &limits, int out_fd,
                             int err_fd, int status_fd) {
    auto fail = [status_fd]() {
        int e = errno;
        [[maybe_unused]] auto n = ::write(status_fd, &e, sizeof e);
        ::_exit(127);
    };
    ::setpgid(0, 0);
    if (::chdir(workdir) != 0) fail();
    int devnull = ::open("/dev/null", O_RDONLY | O_CLOEXEC);
    if (devnull < 0 || ::dup2(devnull, STDIN_FILENO) < 0) fail();
    if (::dup2(out_fd, STDOUT_FILENO) < 0 || ::dup2(err_fd, STDERR_FILENO) < 0) fail();

    rlimit core{0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    if (limits.cpu_limit) {
        auto secs = static_cast<rlim_t>(std::ceil(limits.wall_clock.count())) + 1;
        rlimit cpu{secs, secs + 1};
        ::setrlimit(RLIMIT_CPU, &cpu);
    }
    if (limits.max_processes > 0) {
        rlimit nproc{limits.max_processes, limits.max_processes};
        ::setrlimit(RLIMIT_NPROC, &nproc);
    }

    ::execvp(argv[0], argv);
    fail();
    ::_exit(127);
}

ProcessResult run_process(const std::vector<std::string> &argv, const fs::path &workdir, const ProcessLimits &limits) {
    using clock = std::chrono::steady_clock;
    ProcessResult res;
    if (argv.empty()) {
        res.exec_failed = true;
        res.exec_errno = ENOENT;
        return res;
    }
    auto out = make_pipe();
    auto err = make_pipe();
    auto status = make_pipe();

    std::vector<char *> cargv;
    for (const auto &a : argv) cargv.push_back(const_cast<char *>(a.c_str()));
    cargv.push_back(nullptr);
    const std::string wd = workdir.string();

    const auto start = clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) child_exec(cargv.data(), wd.c_str(), limits, out.write.get(), err.write.get(), status.write.get());

    ::setpgid(pid, pid);
    out.write.reset();
    err.write.reset();
    status.write.reset();

    // Reads 0 bytes once exec succeeds (the write end is close-on-exec).
    int child_errno = 0;
    ssize_t n;
    do {
        n = ::read(status.read.get(), &child_errno, sizeof child_errno);
    } while (n < 0 && errno == EINTR);
    if (n == static_cast<ssize_t>(sizeof child_errno)) {
        int st;
        ::waitpid(pid, &st, 0);
        res.exec_failed = true;
        res.exec_errno = child_errno;
        return res;
    }

    const auto deadline = start + std::chrono::duration_cast<clock::duration>(limits.wall_clock);
    std::optional<clock::time_point> drain_until;
    bool reaped = false;
    int wait_status = 0;
    bool out_open = true, err_open = true;
    char buf[8192];

    auto kill_group = [&] {
        ::kill(-pid, SIGKILL);
        if (!drain_until) drain_until = clock::now() + std::chrono::milliseconds(500);
    };

    while (out_open || err_open || !reaped) {
        auto now = clock::now();
        if (!drain_until && now >= deadline) {
            res.timed_out = true;
            kill_group();
        }
        if (drain_until && now >= *drain_until) break;
        if (!reaped) {
            pid_t w = ::waitpid(pid, &wait_status, WNOHANG);
            if (w == pid) {
                reaped = true;
                // stray descendants must not keep the pipes open
                ::kill(-pid, SIGKILL);
                if (!drain_until) drain_until = clock::now() + std::chrono::milliseconds(500);
            }
        }
        if (!out_open && !err_open) {
            if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(5));
            continue;
        }
        pollfd fds[2];
        int nfds = 0;
        if (out_open) fds[nfds++] = {out.read.get(), POLLIN, 0};
        if (err_open) fds[nfds++] = {err.read.get(), POLLIN, 0};
        auto limit = drain_until ? *drain_until : deadline;
        auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(limit - clock::now()).count();
        wait_ms = std::clamp<long long>(wait_ms, 0, reaped ? 50 : 20);
        int pr = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(wait_ms));
        if (pr < 0 && errno != EINTR) break;
        for (int i = 0; i < nfds && pr > 0; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
            const bool is_out = fds[i].fd == out.read.get();
            if (got <= 0) {
                (is_out ? out_open : err_open) = false;
                continue;
            }
            auto &dst = is_out ? res.out : res.err;
            const auto cap = is_out ? limits.max_stdout : kMaxStderr;
            const auto room = cap > dst.size() ? cap - dst.size() : 0;
            dst.append(buf, std::min(room, static_cast<std::size_t>(got)));
            if (is_out && static_cast<std::size_t>(got) > room && !res.truncated) {
                res.truncated = true;
                kill_group();
            }
        }
    }
    if (!reaped) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &wait_status, 0);
    }
    res.duration = clock::now() - start;
    if (WIFEXITED(wait_status)) res.exit_code = WEXITSTATUS(wait_status);
    if (WIFSIGNALED(wait_status)) res.term_signal = WTERMSIG(wait_status);
    // RLIMIT_CPU delivers SIGXCPU/SIGKILL before the wall clock catches up
    if (res.term_signal == SIGXCPU) res.timed_out = true;
    return res;
}

void write_file(const fs::path &p, std::string_view text) {
    std::ofstream f(p, std::ios::binary);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error("cannot write " + p.string());
}

}  // namespace

const char *to_string(ExecStatus status) noexcept {
    switch (status) {
        case ExecStatus::ok: return "ok";
        case ExecStatus::compile_error: return "compile-error";
        case ExecStatus::timeout: return "timeout";
        case ExecStatus::runtime_error: return "runtime-error";
        case ExecStatus::output_truncated: return "output-truncated";
    }
    return "?";
}

void ResourceLimits::validate() const {
    if (!(wall_clock_seconds > 0)) throw ConfigError("wall_clock_seconds must be positive");
    if (!(compile_wall_clock_seconds > 0)) throw ConfigError("compile_wall_clock_seconds must be positive");
    if (max_output_bytes == 0) throw ConfigError("max_output_bytes must be positive");
    if (max_processes == 0) throw ConfigError("max_processes must be positive");
}

void RunnerProfile::validate() const {
    if (id.empty()) throw ConfigError("runner profile id is empty");
    for (auto ph : {kStudentSourcePlaceholder, kTestInvocationPlaceholder}) {
        if (count_occurrences(compose_template, ph) != 1) {
            throw MissingPlaceholderError(fmt::format("runner {}: compose_template must contain {} exactly once", id, ph));
        }
    }
    if (run_cmd.empty()) throw ConfigError("runner " + id + ": run_cmd is empty");
    if (source_name.empty() || source_name.find('/') != std::string::npos)
        throw ConfigError("runner " + id + ": source_name must be a plain file name");
    if (binary_name.empty() || binary_name.find('/') != std::string::npos)
        throw ConfigError("runner " + id + ": binary_name must be a plain file name");
    limits.validate();
}

json runner_to_json(const RunnerProfile &p) {
    return json{{"schema_version", 1},
                {"id", p.id},
                {"compose_template", p.compose_template},
                {"source_name", p.source_name},
                {"binary_name", p.binary_name},
                {"compile_cmd", p.compile_cmd},
                {"run_cmd", p.run_cmd},
                {"limits", json{{"wall_clock_seconds", p.limits.wall_clock_seconds},
                                {"max_output_bytes", p.limits.max_output_bytes},
                                {"max_processes", p.limits.max_processes},
                                {"compile_wall_clock_seconds", p.limits.compile_wall_clock_seconds}}}};
}

RunnerProfile runner_from_json(const json &j, const std::string &location) {
    RunnerProfile p;
    try {
        if (j.at("schema_version").get<int>() != 1) throw ConfigError("unsupported schema_version");
        p.id = j.at("id").get<std::string>();
        // Either one string or a list of lines.
        const auto &tpl = j.at("compose_template");
        if (tpl.is_array()) {
            for (const auto &line : tpl) p.compose_template += line.get<std::string>() + "\n";
        } else {
            p.compose_template = tpl.get<std::string>();
        }
        p.source_name = j.value("source_name", p.source_name);
        p.binary_name = j.value("binary_name", p.binary_name);
        p.compile_cmd = j.value("compile_cmd", "");
        p.run_cmd = j.at("run_cmd").get<std::string>();
        if (j.contains("limits")) {
            const auto &l = j.at("limits");
            p.limits.wall_clock_seconds = l.value("wall_clock_seconds", p.limits.wall_clock_seconds);
            p.limits.max_output_bytes = l.value("max_output_bytes", p.limits.max_output_bytes);
            p.limits.max_processes = l.value("max_processes", p.limits.max_processes);
            p.limits.compile_wall_clock_seconds =
                l.value("compile_wall_clock_seconds", p.limits.compile_wall_clock_seconds);
        }
        p.validate();
    } catch (const json::exception &e) {
        throw ParseError(location, e.what());
    } catch (const ConfigError &e) {
        throw ParseError(location, e.what());
    } catch (const MissingPlaceholderError &e) {
        throw ParseError(location, e.what());
    }
    return p;
}

std::map<std::string, RunnerProfile> load_runner_profiles(const fs::path &dir) {
    std::map<std::string, RunnerProfile> out;
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".runner") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
        std::ifstream in(f);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error &e) {
            throw ParseError(f.string(), e.what());
        }
        auto p = runner_from_json(j, f.string());
        if (out.count(p.id)) throw ParseError(f.string(), "duplicate runner profile id '" + p.id + "'");
        out.emplace(p.id, std::move(p));
    }
    return out;
}

std::string compose_program(const RunnerProfile &profile, std::string_view student_source, std::string_view invocation) {
    const auto &tpl = profile.compose_template;
    for (auto ph : {kStudentSourcePlaceholder, kTestInvocationPlaceholder}) {
        auto n = count_occurrences(tpl, ph);
        if (n != 1) {
            throw MissingPlaceholderError(fmt::format("compose template has {} occurrence(s) of {}", n, ph));
        }
    }
    // Substitute in template order so placeholder-like text inside the
    // student source is never expanded.
    auto src_pos = tpl.find(kStudentSourcePlaceholder);
    auto inv_pos = tpl.find(kTestInvocationPlaceholder);
    struct Slot {
        std::size_t pos;
        std::size_t len;
        std::string_view text;
    };
    Slot first{src_pos, kStudentSourcePlaceholder.size(), student_source};
    Slot second{inv_pos, kTestInvocationPlaceholder.size(), invocation};
    if (second.pos < first.pos) std::swap(first, second);
    std::string out;
    out.reserve(tpl.size() + student_source.size() + invocation.size());
    out.append(tpl, 0, first.pos);
    out.append(first.text);
    out.append(tpl, first.pos + first.len, second.pos - first.pos - first.len);
    out.append(second.text);
    out.append(tpl, second.pos + second.len);
    return out;
}

Sandbox::Sandbox(std::ptrdiff_t max_concurrent)
    : max_concurrent_(max_concurrent),
      slots_(std::make_unique<std::counting_semaphore<>>(max_concurrent)) {
    if (max_concurrent < 1) throw ConfigError("sandbox concurrency must be at least 1");
}

ExecutionResult Sandbox::execute(const RunnerProfile &profile, std::string_view program) const {
    profile.validate();
    slots_->acquire();
    struct Release {
        std::counting_semaphore<> *s;
        ~Release() { s->release(); }
    } release{slots_.get()};

    ScratchDir dir;
    write_file(dir.path() / profile.source_name, program);
    ExecutionResult result;
    const auto start = std::chrono::steady_clock::now();

    if (!profile.compile_cmd.empty()) {
        auto argv = expand_command(profile.compile_cmd, dir.path(), profile);
        ProcessLimits limits{std::chrono::duration<double>(profile.limits.compile_wall_clock_seconds), 1 << 20, 0, false};
        auto pr = run_process(argv, dir.path(), limits);
        if (pr.exec_failed) {
            throw ToolchainMissingError(fmt::format("cannot start '{}': {}", argv.empty() ? "" : argv[0],
                                                    std::strerror(pr.exec_errno)));
        }
        if (pr.timed_out || pr.exit_code != 0 || pr.term_signal != 0) {
            result.status = ExecStatus::compile_error;
            result.stdout_text = std::move(pr.out);
            result.stderr_text = pr.timed_out ? "compilation timed out" : std::move(pr.err);
            if (result.stderr_text.empty()) result.stderr_text = result.stdout_text;
            if (result.stderr_text.empty()) result.stderr_text = "compiler exited with failure";
            result.exit_code = pr.exit_code;
            result.duration = std::chrono::steady_clock::now() - start;
            return result;
        }
    }

    auto argv = expand_command(profile.run_cmd, dir.path(), profile);
    ProcessLimits limits{std::chrono::duration<double>(profile.limits.wall_clock_seconds),
                         profile.limits.max_output_bytes, profile.limits.max_processes, true};
    auto pr = run_process(argv, dir.path(), limits);
    if (pr.exec_failed) {
        throw ToolchainMissingError(fmt::format("cannot start '{}': {}", argv.empty() ? "" : argv[0],
                                                std::strerror(pr.exec_errno)));
    }
    result.stdout_text = std::move(pr.out);
    result.stderr_text = std::move(pr.err);
    result.exit_code = pr.exit_code;
    result.duration = pr.duration;
    if (pr.timed_out) {
        result.status = ExecStatus::timeout;
    } else if (pr.truncated) {
        result.status = ExecStatus::output_truncated;
    } else if (pr.exit_code != 0 || pr.term_signal != 0) {
        result.status = ExecStatus::runtime_error;
        if (pr.term_signal != 0 && result.stderr_text.empty()) {
            result.stderr_text = fmt::format("terminated by signal {}", pr.term_signal);
        }
    }
    return result;
}

}  // namespace probeable
