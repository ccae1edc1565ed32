#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "probeable/attempt_log.hpp"
#include "probeable/oracle.hpp"
#include "probeable/sandbox.hpp"

namespace probeable {

enum class Role { student, instructor };

const char *to_string(Role r) noexcept;

struct Session {
    std::string student_id;
    Role role = Role::student;
    Timestamp issued_at{};
    Timestamp expiry{};
};

// Bearer tokens -> sessions. Persisted as CSV
// `token,student_id,role,issued_at,expiry`.
class SessionRegistry {
public:
    SessionRegistry() = default;
    SessionRegistry(SessionRegistry &&other) noexcept : sessions_(std::move(other.sessions_)) {}

    static SessionRegistry load(const std::filesystem::path &csv);

    // Random 32-hex-digit token valid for `ttl` from now.
    std::string mint(const std::string &student_id, Role role,
                     std::chrono::seconds ttl = std::chrono::hours(24 * 120));
    void add(const std::string &token, Session session);
    // nullopt for unknown or expired tokens.
    std::optional<Session> lookup(const std::string &token, Timestamp now = now_utc()) const;

    std::string to_csv() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, Session> sessions_;
};

// Closed set of machine-readable error codes in the ApiError envelope
// {"error": {"code", "message", "detail"?}}.
namespace api_error {
inline constexpr const char *unauthorized = "unauthorized";              // 401
inline constexpr const char *forbidden = "forbidden";                    // 403
inline constexpr const char *not_found = "not_found";                    // 404
inline constexpr const char *bad_request = "bad_request";                // 400
inline constexpr const char *conflict = "submission_in_progress";        // 409
inline constexpr const char *signature_violation = "signature_violation";  // 422
inline constexpr const char *sandbox_unavailable = "sandbox_unavailable";  // 503
inline constexpr const char *internal = "internal";                      // 500
}  // namespace api_error

// HTTP front end:
//   GET  /healthz
//   GET  /problems/{id}
//   POST /problems/{id}/probes        {"args": [...]}
//   POST /problems/{id}/submissions   {"source": "..."}
//   GET  /analytics/report?ratio_threshold=&include_defaults=&exclude_bare_s=&exclude_no_code=
// All bodies are JSON; all endpoints except /healthz need
// `Authorization: Bearer <token>`.
class Service {
public:
    Service(const ProblemBank &bank, const OracleRegistry &oracles, const Sandbox &sandbox,
            AttemptStore &store, const SessionRegistry &sessions, const Roster &roster);
    ~Service();

    Service(const Service &) = delete;
    Service &operator=(const Service &) = delete;

    // Binds and serves on a background thread; returns the bound port
    // (pass port 0 for an ephemeral one). Throws Error if binding fails.
    int start(const std::string &host, int port);
    // Binds and serves on the calling thread until stop().
    void run(const std::string &host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace probeable
