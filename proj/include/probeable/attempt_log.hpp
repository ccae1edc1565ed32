#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace probeable {

using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

Timestamp now_utc() noexcept;
// "2024-08-05T10:15:30.123Z"
std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view text);

enum class EventKind : char { probe = 'P', fail = 'F', success = 'S' };

struct AttemptEvent {
    std::string student_id;
    std::string problem_id;
    std::uint64_t seq_no = 0;  // assigned by the store
    Timestamp at{};
    EventKind kind = EventKind::probe;
    bool is_default = false;  // only meaningful for probes
    std::string payload_ref;

    bool operator==(const AttemptEvent &) const = default;
};

enum class Classification { valid, bare_s, no_code };

const char *to_string(Classification c) noexcept;

struct AttemptSequence {
    std::string student_id;
    std::string problem_id;
    std::string symbols;  // over {P, F, S}
    Classification classification = Classification::no_code;

    bool has_success() const noexcept { return symbols.find('S') != std::string::npos; }
};

// bare_s iff symbols == "S"; no_code iff no F and no S; valid otherwise.
Classification classify(std::string_view symbols) noexcept;

// Append-only store of probe/submission payloads and P/F/S events, backed by
// a newline-delimited JSON file (or memory only). All writes go through one
// mutex, which also assigns dense per-(student, problem) sequence numbers.
class AttemptStore {
public:
    // In-memory store.
    AttemptStore() = default;
    // Replays `path` if it exists (ParseError/LogError on corruption) and
    // appends to it from then on.
    explicit AttemptStore(const std::filesystem::path &path);

    // Read-only, in-memory copy of the log at `path`.
    static std::unique_ptr<AttemptStore> replay(const std::filesystem::path &path);

    AttemptStore(const AttemptStore &) = delete;
    AttemptStore &operator=(const AttemptStore &) = delete;

    // Stores a probe request or submission body; returns its id.
    std::string put_payload(const nlohmann::json &body);
    bool has_payload(const std::string &id) const;
    std::optional<nlohmann::json> payload(const std::string &id) const;

    // Assigns seq_no = previous + 1 for the event's (student, problem) and
    // persists it. Throws LogError for dangling payload refs, is_default on
    // a code submission, or write failures.
    std::uint64_t append_event(AttemptEvent event);

    // Consistent copy of all events in append order.
    std::vector<AttemptEvent> snapshot() const;
    std::vector<AttemptEvent> events_for(const std::string &student_id,
                                         const std::string &problem_id) const;
    std::size_t event_count() const;

private:
    void load(const std::filesystem::path &path);
    void apply_line(const std::string &line, const std::string &location);
    void write_line(const nlohmann::json &record);

    mutable std::mutex mu_;
    std::optional<std::ofstream> out_;
    std::vector<AttemptEvent> events_;
    std::map<std::string, nlohmann::json> payloads_;
    std::map<std::pair<std::string, std::string>, std::uint64_t> last_seq_;
    std::uint64_t next_payload_ = 1;
};

nlohmann::json event_to_json(const AttemptEvent &e);
AttemptEvent event_from_json(const nlohmann::json &j, const std::string &location);

// Symbols of the (student, problem) events in seq_no order; default probes
// are dropped unless include_defaults.
AttemptSequence derive_sequence(const std::vector<AttemptEvent> &events,
                                const std::string &student_id, const std::string &problem_id,
                                bool include_defaults);
AttemptSequence derive_sequence(const AttemptStore &store, const std::string &student_id,
                                const std::string &problem_id, bool include_defaults);

// One sequence per (problem, student) pair present in `events`, ordered by
// problem id then student id.
std::vector<AttemptSequence> derive_all(const std::vector<AttemptEvent> &events,
                                        bool include_defaults);

enum class GradeCategory : char { A = 'A', B = 'B', C = 'C', D = 'D', U = 'U' };

// "A+", "A", "A-" (ASCII hyphen or U+2212) ... "D-" -> A..D; anything else
// -> nullopt.
std::optional<GradeCategory> category_from_letter(std::string_view letter) noexcept;
char to_char(GradeCategory c) noexcept;

struct StudentRecord {
    std::string student_id;
    std::string letter_grade;
    GradeCategory category = GradeCategory::U;
};

// Roster imported from CSV with header `student_id,letter_grade`.
class Roster {
public:
    Roster() = default;

    static Roster load(const std::filesystem::path &csv);
    static Roster parse(std::string_view csv_text, const std::string &location = "roster");

    void add(const std::string &student_id, const std::string &letter_grade);
    // U for unknown students.
    GradeCategory category_of(const std::string &student_id) const noexcept;
    bool contains(const std::string &student_id) const noexcept;
    const std::map<std::string, StudentRecord> &records() const noexcept { return records_; }

    std::string to_csv() const;

private:
    std::map<std::string, StudentRecord> records_;
};

}  // namespace probeable
