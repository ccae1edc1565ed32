#include "probeable/service.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "httplib.h"
#include "probeable/analytics.hpp"
#include "probeable/error.hpp"
#include "probeable/grading.hpp"

namespace probeable {

using nlohmann::json;

const char *to_string(Role r) noexcept { return r == Role::instructor ? "instructor" : "student"; }

SessionRegistry SessionRegistry::load(const std::filesystem::path &csv) {
    std::ifstream in(csv);
    if (!in) throw ParseError(csv.string(), "cannot open token file");
    SessionRegistry reg;
    std::string line;
    bool header = true;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "token,student_id,role,issued_at,expiry")
                throw ParseError(fmt::format("{}:{}", csv.string(), lineno), "unexpected header");
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
        const auto loc = fmt::format("{}:{}", csv.string(), lineno);
        if (cols.size() != 5) throw ParseError(loc, "expected 5 columns");
        Session s;
        s.student_id = cols[1];
        if (cols[2] == "student") {
            s.role = Role::student;
        } else if (cols[2] == "instructor") {
            s.role = Role::instructor;
        } else {
            throw ParseError(loc, "unknown role '" + cols[2] + "'");
        }
        auto issued = parse_timestamp(cols[3]);
        auto expiry = parse_timestamp(cols[4]);
        if (!issued || !expiry) throw ParseError(loc, "bad timestamp");
        s.issued_at = *issued;
        s.expiry = *expiry;
        reg.add(cols[0], s);
    }
    return reg;
}

std::string SessionRegistry::mint(const std::string &student_id, Role role, std::chrono::seconds ttl) {
    static thread_local std::random_device rd;
    std::uniform_int_distribution<std::uint32_t> dist;
    std::string token;
    for (int i = 0; i < 4; ++i) token += fmt::format("{:08x}", dist(rd));
    const auto now = now_utc();
    add(token, Session{student_id, role, now, now + std::chrono::duration_cast<std::chrono::milliseconds>(ttl)});
    return token;
}

void SessionRegistry::add(const std::string &token, Session session) {
    if (token.empty() || token.find(',') != std::string::npos) throw ConfigError("malformed token");
    std::lock_guard lock(mu_);
    sessions_[token] = std::move(session);
}

std::optional<Session> SessionRegistry::lookup(const std::string &token, Timestamp now) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(token);
    if (it == sessions_.end() || now >= it->second.expiry) return std::nullopt;
    return it->second;
}

std::string SessionRegistry::to_csv() const {
    std::lock_guard lock(mu_);
    std::string out = "token,student_id,role,issued_at,expiry\n";
    for (const auto &[token, s] : sessions_) {
        out += fmt::format("{},{},{},{},{}\n", token, s.student_id, to_string(s.role), format_timestamp(s.issued_at),
                           format_timestamp(s.expiry));
    }
    return out;
}

struct Service::Impl {
    const ProblemBank &bank;
    const OracleRegistry &oracles;
    const Sandbox &sandbox;
    AttemptStore &store;
    const SessionRegistry &sessions;
    const Roster &roster;

    httplib::Server server;
    std::thread thread;

    std::mutex inflight_mu;
    std::set<std::pair<std::string, std::string>> inflight;

    Impl(const ProblemBank &b, const OracleRegistry &o, const Sandbox &s, AttemptStore &st, const SessionRegistry &se,
         const Roster &r)
        : bank(b), oracles(o), sandbox(s), store(st), sessions(se), roster(r) {
        routes();
    }

    static void send(httplib::Response &res, int status, const json &body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void fail(httplib::Response &res, int status, const char *code, const std::string &message,
                     const json &detail = nullptr) {
        json err{{"code", code}, {"message", message}};
        if (!detail.is_null()) err["detail"] = detail;
        send(res, status, json{{"error", err}});
    }

    std::optional<Session> authenticate(const httplib::Request &req, httplib::Response &res) const {
        const auto header = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        std::optional<Session> session;
        if (header.rfind(prefix, 0) == 0) session = sessions.lookup(header.substr(prefix.size()));
        if (!session) fail(res, 401, api_error::unauthorized, "missing, unknown or expired session token");
        return session;
    }

    const ProblemSpec *problem_or_404(const std::string &id, httplib::Response &res) const {
        const auto *spec = bank.find(id);
        if (!spec) fail(res, 404, api_error::not_found, "unknown problem '" + id + "'");
        return spec;
    }

    json progress(const std::string &student, const ProblemSpec &spec) const {
        auto events = store.events_for(student, spec.id);
        std::size_t probes = 0;
        bool solved = false;
        for (const auto &e : events) {
            if (e.kind == EventKind::probe) ++probes;
            if (e.kind == EventKind::success) solved = true;
        }
        auto state = penalty_state_for(events, spec.penalty);
        return json{{"probe_count", probes},
                    {"failing_count", state.failing_count},
                    {"score", compute_final_score(state)},
                    {"solved", solved}};
    }

    void get_problem(const httplib::Request &req, httplib::Response &res) {
        auto session = authenticate(req, res);
        if (!session) return;
        const auto *spec = problem_or_404(req.matches[1], res);
        if (!spec) return;
        json sig = json::array();
        for (const auto &p : spec->signature.params) {
            json pj{{"name", p.name}, {"kind", to_string(p.kind)}};
            if (p.kind != ParamKind::string) {
                pj["min"] = p.min;
                pj["max"] = p.max;
            }
            if (p.kind != ParamKind::integer) pj["max_length"] = p.max_length;
            if (p.length_of) pj["length_of"] = *p.length_of;
            sig.push_back(pj);
        }
        json body{{"id", spec->id},
                  {"statement", render_statement(*spec)},
                  {"function", spec->function},
                  {"signature", sig},
                  {"default_probe", args_to_json(spec->default_probe)},
                  {"default_call", render_call(spec->function, spec->default_probe)}};
        body.update(progress(session->student_id, *spec));
        send(res, 200, body);
    }

    void post_probe(const httplib::Request &req, httplib::Response &res) {
        auto session = authenticate(req, res);
        if (!session) return;
        const auto *spec = problem_or_404(req.matches[1], res);
        if (!spec) return;
        ProbeRequest probe{spec->id, {}};
        try {
            auto body = json::parse(req.body);
            if (!body.is_object() || !body.contains("args")) throw SignatureError("", "body must contain \"args\"");
            probe.args = args_from_json(body.at("args"));
            spec->signature.validate(probe.args);
        } catch (const json::parse_error &e) {
            return fail(res, 400, api_error::bad_request, std::string("malformed JSON: ") + e.what());
        } catch (const SignatureError &e) {
            json detail = e.param().empty() ? json(nullptr) : json{{"param", e.param()}};
            return fail(res, 422, api_error::signature_violation, e.what(), detail);
        }

        Clarification clar;
        try {
            clar = evaluate_probe(bank, oracles, probe);
        } catch (const Error &e) {
            return fail(res, 500, api_error::internal, e.what());
        }

        AttemptEvent event;
        event.student_id = session->student_id;
        event.problem_id = spec->id;
        event.at = now_utc();
        event.kind = EventKind::probe;
        event.is_default = clar.is_default;
        try {
            event.payload_ref = store.put_payload(json{{"type", "probe"}, {"args", args_to_json(probe.args)},
                                                       {"output", clar.output}});
            store.append_event(event);
        } catch (const Error &e) {
            return fail(res, 500, api_error::internal, e.what());
        }
        auto body = json{{"output", clar.output}, {"is_default", clar.is_default}};
        body["probe_count"] = progress(session->student_id, *spec).at("probe_count");
        send(res, 200, body);
    }

    void post_submission(const httplib::Request &req, httplib::Response &res) {
        auto session = authenticate(req, res);
        if (!session) return;
        const auto *spec = problem_or_404(req.matches[1], res);
        if (!spec) return;

        Submission sub{session->student_id, spec->id, {}, now_utc()};
        try {
            auto body = json::parse(req.body);
            sub.source = body.at("source").get<std::string>();
        } catch (const json::exception &e) {
            return fail(res, 400, api_error::bad_request, std::string("body must be {\"source\": \"...\"}: ") + e.what());
        }
        if (sub.source.find_first_not_of(" \t\r\n") == std::string::npos) {
            return fail(res, 400, api_error::bad_request, "source is empty");
        }

        const auto key = std::make_pair(sub.student_id, sub.problem_id);
        {
            std::lock_guard lock(inflight_mu);
            if (!inflight.insert(key).second) {
                return fail(res, 409, api_error::conflict, "a submission for this problem is already being graded");
            }
        }
        struct Unlock {
            Impl *self;
            std::pair<std::string, std::string> key;
            ~Unlock() {
                std::lock_guard lock(self->inflight_mu);
                self->inflight.erase(key);
            }
        } unlock{this, key};

        SubmissionOutcome outcome;
        try {
            outcome = grade_submission(bank, sandbox, sub);
        } catch (const ToolchainMissingError &e) {
            return fail(res, 503, api_error::sandbox_unavailable, e.what());
        } catch (const Error &e) {
            return fail(res, 503, api_error::sandbox_unavailable, e.what());
        }

        AttemptEvent event;
        try {
            event = record_outcome(store, sub, outcome);
        } catch (const Error &e) {
            return fail(res, 500, api_error::internal, e.what());
        }
        auto body = outcome_to_json(outcome);
        body.update(progress(sub.student_id, *spec));
        body["seq_no"] = event.seq_no;
        send(res, 200, body);
    }

    static std::optional<bool> parse_bool(const std::string &s) {
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        return std::nullopt;
    }

    void get_report(const httplib::Request &req, httplib::Response &res) {
        auto session = authenticate(req, res);
        if (!session) return;
        if (session->role != Role::instructor) {
            return fail(res, 403, api_error::forbidden, "analytics require an instructor token");
        }
        CohortFilter filter;
        for (const auto &[name, value] : req.params) {
            if (name == "ratio_threshold") {
                double v = 0;
                auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
                if (ec != std::errc() || ptr != value.data() + value.size() || !(v > 0) || !std::isfinite(v)) {
                    return fail(res, 400, api_error::bad_request, "ratio_threshold must be a positive number");
                }
                filter.ratio_outlier_threshold = v;
                continue;
            }
            auto b = parse_bool(value);
            if (!b) return fail(res, 400, api_error::bad_request, name + " must be true or false");
            if (name == "include_defaults") {
                filter.exclude_default_probes = !*b;
            } else if (name == "exclude_bare_s") {
                filter.exclude_bare_s = *b;
            } else if (name == "exclude_no_code") {
                filter.exclude_no_code = *b;
            } else {
                return fail(res, 400, api_error::bad_request, "unknown filter '" + name + "'");
            }
        }
        send(res, 200, report_to_json(build_report(store.snapshot(), roster, filter)));
    }

    void routes() {
        server.Get("/healthz", [](const httplib::Request &, httplib::Response &res) {
            send(res, 200, json{{"status", "ok"}});
        });
        server.Get(R"(/problems/([^/]+))", [this](const auto &req, auto &res) { get_problem(req, res); });
        server.Post(R"(/problems/([^/]+)/probes)", [this](const auto &req, auto &res) { post_probe(req, res); });
        server.Post(R"(/problems/([^/]+)/submissions)",
                    [this](const auto &req, auto &res) { post_submission(req, res); });
        server.Get("/analytics/report", [this](const auto &req, auto &res) { get_report(req, res); });
        server.set_exception_handler([](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
            std::string what = "unexpected failure";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception &e) {
                what = e.what();
            } catch (...) {
            }
            fail(res, 500, api_error::internal, what);
        });
    }
};

Service::Service(const ProblemBank &bank, const OracleRegistry &oracles, const Sandbox &sandbox, AttemptStore &store,
                 const SessionRegistry &sessions, const Roster &roster)
    : impl_(std::make_unique<Impl>(bank, oracles, sandbox, store, sessions, roster)) {}

Service::~Service() { stop(); }

int Service::start(const std::string &host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw Error(fmt::format("cannot bind {}:{}", host, port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void Service::run(const std::string &host, int port) {
    if (!impl_->server.listen(host, port)) throw Error(fmt::format("cannot listen on {}:{}", host, port));
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace probeable
