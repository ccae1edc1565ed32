#include "probeable/attempt_log.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "probeable/error.hpp"

namespace probeable {

using nlohmann::json;

Timestamp now_utc() noexcept {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

std::string format_timestamp(Timestamp t) {
    const auto ms = t.time_since_epoch().count();
    auto secs = static_cast<std::time_t>(ms / 1000);
    auto frac = ms % 1000;
    if (frac < 0) {
        frac += 1000;
        secs -= 1;
    }
    std::tm tm{};
    ::gmtime_r(&secs, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    if (text.size() != 24) return std::nullopt;
    std::tm tm{};
    int ms = 0;
    char z = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                    &tm.tm_min, &tm.tm_sec, &ms, &z) != 8 ||
        z != 'Z') {
        return std::nullopt;
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const auto secs = ::timegm(&tm);
    return Timestamp(std::chrono::milliseconds(static_cast<std::int64_t>(secs) * 1000 + ms));
}

const char *to_string(Classification c) noexcept {
    switch (c) {
        case Classification::valid: return "valid";
        case Classification::bare_s: return "bare_s";
        case Classification::no_code: return "no_code";
    }
    return "?";
}

Classification classify(std::string_view symbols) noexcept {
    if (symbols == "S") return Classification::bare_s;
    if (symbols.find_first_of("FS") == std::string_view::npos) return Classification::no_code;
    return Classification::valid;
}

json event_to_json(const AttemptEvent &e) {
    return json{{"rec", "event"},
                {"student_id", e.student_id},
                {"problem_id", e.problem_id},
                {"seq_no", e.seq_no},
                {"at", format_timestamp(e.at)},
                {"kind", std::string(1, static_cast<char>(e.kind))},
                {"is_default", e.is_default},
                {"payload_ref", e.payload_ref}};
}

AttemptEvent event_from_json(const json &j, const std::string &location) {
    AttemptEvent e;
    try {
        e.student_id = j.at("student_id").get<std::string>();
        e.problem_id = j.at("problem_id").get<std::string>();
        e.seq_no = j.at("seq_no").get<std::uint64_t>();
        auto at = parse_timestamp(j.at("at").get<std::string>());
        if (!at) throw ParseError(location, "bad timestamp");
        e.at = *at;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "P") {
            e.kind = EventKind::probe;
        } else if (kind == "F") {
            e.kind = EventKind::fail;
        } else if (kind == "S") {
            e.kind = EventKind::success;
        } else {
            throw ParseError(location, "unknown event kind '" + kind + "'");
        }
        e.is_default = j.value("is_default", false);
        e.payload_ref = j.at("payload_ref").get<std::string>();
    } catch (const json::exception &ex) {
        throw ParseError(location, ex.what());
    }
    if (e.student_id.empty() || e.problem_id.empty()) throw ParseError(location, "empty student_id or problem_id");
    return e;
}

AttemptStore::AttemptStore(const std::filesystem::path &path) {
    if (std::filesystem::exists(path)) load(path);
    out_.emplace(path, std::ios::app);
    if (!*out_) throw LogError("cannot open log " + path.string() + " for appending");
}

std::unique_ptr<AttemptStore> AttemptStore::replay(const std::filesystem::path &path) {
    auto store = std::make_unique<AttemptStore>();
    store->load(path);
    return store;
}

void AttemptStore::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw LogError("cannot read log " + path.string());
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        apply_line(line, fmt::format("{}:{}", path.string(), lineno));
    }
}

void AttemptStore::apply_line(const std::string &line, const std::string &location) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error &e) {
        throw ParseError(location, e.what());
    }
    const auto rec = j.value("rec", "");
    if (rec == "payload") {
        std::string id;
        try {
            id = j.at("id").get<std::string>();
        } catch (const json::exception &e) {
            throw ParseError(location, e.what());
        }
        if (payloads_.count(id)) throw LogError(location + ": duplicate payload id '" + id + "'");
        payloads_[id] = j.value("data", json::object());
        std::uint64_t n = 0;
        if (std::sscanf(id.c_str(), "pl-%lu", &n) == 1) next_payload_ = std::max(next_payload_, n + 1);
        return;
    }
    if (rec != "event") throw ParseError(location, "unknown record type '" + rec + "'");
    auto e = event_from_json(j, location);
    if (!payloads_.count(e.payload_ref)) throw LogError(location + ": dangling payload_ref '" + e.payload_ref + "'");
    if (e.kind != EventKind::probe && e.is_default) throw LogError(location + ": code submission marked default");
    auto &last = last_seq_[{e.student_id, e.problem_id}];
    if (e.seq_no != last + 1) {
        throw LogError(fmt::format("{}: seq_no {} for ({}, {}) does not follow {}", location, e.seq_no, e.student_id,
                                   e.problem_id, last));
    }
    last = e.seq_no;
    events_.push_back(std::move(e));
}

void AttemptStore::write_line(const json &record) {
    if (!out_) return;
    *out_ << record.dump() << '\n';
    out_->flush();
    if (!*out_) throw LogError("log append failed");
}

std::string AttemptStore::put_payload(const json &body) {
    std::lock_guard lock(mu_);
    auto id = fmt::format("pl-{}", next_payload_);
    write_line(json{{"rec", "payload"}, {"id", id}, {"data", body}});
    ++next_payload_;
    payloads_[id] = body;
    return id;
}

bool AttemptStore::has_payload(const std::string &id) const {
    std::lock_guard lock(mu_);
    return payloads_.count(id) != 0;
}

std::optional<json> AttemptStore::payload(const std::string &id) const {
    std::lock_guard lock(mu_);
    auto it = payloads_.find(id);
    if (it == payloads_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t AttemptStore::append_event(AttemptEvent event) {
    std::lock_guard lock(mu_);
    if (!payloads_.count(event.payload_ref)) throw LogError("dangling payload_ref '" + event.payload_ref + "'");
    if (event.kind != EventKind::probe && event.is_default) throw LogError("code submissions cannot be default probes");
    if (event.student_id.empty() || event.problem_id.empty()) throw LogError("event without student or problem id");
    auto &last = last_seq_[{event.student_id, event.problem_id}];
    event.seq_no = last + 1;
    write_line(event_to_json(event));
    last = event.seq_no;
    events_.push_back(std::move(event));
    return last;
}

std::vector<AttemptEvent> AttemptStore::snapshot() const {
    std::lock_guard lock(mu_);
    return events_;
}

std::vector<AttemptEvent> AttemptStore::events_for(const std::string &student_id, const std::string &problem_id) const {
    std::lock_guard lock(mu_);
    std::vector<AttemptEvent> out;
    for (const auto &e : events_) {
        if (e.student_id == student_id && e.problem_id == problem_id) out.push_back(e);
    }
    return out;
}

std::size_t AttemptStore::event_count() const {
    std::lock_guard lock(mu_);
    return events_.size();
}

AttemptSequence derive_sequence(const std::vector<AttemptEvent> &events, const std::string &student_id,
                                const std::string &problem_id, bool include_defaults) {
    std::vector<const AttemptEvent *> mine;
    for (const auto &e : events) {
        if (e.student_id == student_id && e.problem_id == problem_id) mine.push_back(&e);
    }
    std::stable_sort(mine.begin(), mine.end(), [](const auto *a, const auto *b) { return a->seq_no < b->seq_no; });
    AttemptSequence seq{student_id, problem_id, {}, Classification::no_code};
    for (const auto *e : mine) {
        if (e->kind == EventKind::probe && e->is_default && !include_defaults) continue;
        seq.symbols += static_cast<char>(e->kind);
    }
    seq.classification = classify(seq.symbols);
    return seq;
}

AttemptSequence derive_sequence(const AttemptStore &store, const std::string &student_id,
                                const std::string &problem_id, bool include_defaults) {
    return derive_sequence(store.events_for(student_id, problem_id), student_id, problem_id, include_defaults);
}

std::vector<AttemptSequence> derive_all(const std::vector<AttemptEvent> &events, bool include_defaults) {
    std::map<std::pair<std::string, std::string>, std::vector<const AttemptEvent *>> by_attempt;
    for (const auto &e : events) by_attempt[{e.problem_id, e.student_id}].push_back(&e);
    std::vector<AttemptSequence> out;
    out.reserve(by_attempt.size());
    for (auto &[key, evs] : by_attempt) {
        std::stable_sort(evs.begin(), evs.end(), [](const auto *a, const auto *b) { return a->seq_no < b->seq_no; });
        AttemptSequence seq{key.second, key.first, {}, Classification::no_code};
        for (const auto *e : evs) {
            if (e->kind == EventKind::probe && e->is_default && !include_defaults) continue;
            seq.symbols += static_cast<char>(e->kind);
        }
        seq.classification = classify(seq.symbols);
        out.push_back(std::move(seq));
    }
    return out;
}

std::optional<GradeCategory> category_from_letter(std::string_view letter) noexcept {
    if (letter.empty()) return std::nullopt;
    GradeCategory cat;
    switch (letter.front()) {
        case 'A': cat = GradeCategory::A; break;
        case 'B': cat = GradeCategory::B; break;
        case 'C': cat = GradeCategory::C; break;
        case 'D': cat = GradeCategory::D; break;
        default: return std::nullopt;
    }
    auto rest = letter.substr(1);
    if (rest.empty() || rest == "+" || rest == "-" || rest == "\xE2\x88\x92") return cat;
    return std::nullopt;
}

char to_char(GradeCategory c) noexcept { return static_cast<char>(c); }

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Roster Roster::load(const std::filesystem::path &csv) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw ParseError(csv.string(), "cannot open roster");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), csv.string());
}

Roster Roster::parse(std::string_view csv_text, const std::string &location) {
    Roster roster;
    std::istringstream in{std::string(csv_text)};
    std::string line;
    bool header_seen = false;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        auto t = trim(line);
        if (t.empty()) continue;
        const auto loc = fmt::format("{}:{}", location, lineno);
        auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
            throw ParseError(loc, "expected two columns");
        }
        auto id = trim(std::string_view(t).substr(0, comma));
        auto grade = trim(std::string_view(t).substr(comma + 1));
        if (!header_seen) {
            if (id != "student_id" || grade != "letter_grade") throw ParseError(loc, "expected header student_id,letter_grade");
            header_seen = true;
            continue;
        }
        if (id.empty()) throw ParseError(loc, "empty student_id");
        if (!category_from_letter(grade)) throw ParseError(loc, "unknown letter grade '" + grade + "'");
        if (roster.contains(id)) throw ParseError(loc, "duplicate student_id '" + id + "'");
        roster.add(id, grade);
    }
    if (!header_seen) throw ParseError(location, "missing header student_id,letter_grade");
    return roster;
}

void Roster::add(const std::string &student_id, const std::string &letter_grade) {
    auto cat = category_from_letter(letter_grade);
    records_[student_id] = StudentRecord{student_id, letter_grade, cat.value_or(GradeCategory::U)};
}

GradeCategory Roster::category_of(const std::string &student_id) const noexcept {
    auto it = records_.find(student_id);
    return it == records_.end() ? GradeCategory::U : it->second.category;
}

bool Roster::contains(const std::string &student_id) const noexcept { return records_.count(student_id) != 0; }

std::string Roster::to_csv() const {
    std::string out = "student_id,letter_grade\n";
    for (const auto &[id, rec] : records_) out += id + "," + rec.letter_grade + "\n";
    return out;
}

}  // namespace probeable
