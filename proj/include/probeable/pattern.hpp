#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace probeable {

enum class PatternKind { literal, wildcard, regex };

const char *to_string(PatternKind kind) noexcept;

// Expected output of a test case.
struct OutputPattern {
    PatternKind kind = PatternKind::literal;
    std::string body;

    static OutputPattern literal(std::string text) { return {PatternKind::literal, std::move(text)}; }
    static OutputPattern wildcard() { return {PatternKind::wildcard, "*"}; }
    static OutputPattern regex(std::string re) { return {PatternKind::regex, std::move(re)}; }

    bool operator==(const OutputPattern &) const = default;
};

// Strips trailing whitespace from every line and drops trailing newlines.
// Idempotent.
std::string normalize_output(std::string_view text);

// wildcard: always true. literal: equality after normalize_output on both
// sides. regex: ECMAScript full match against the normalized text.
// Throws PatternError on a malformed regex body.
bool match_output(std::string_view actual, const OutputPattern &pattern);

}  // namespace probeable
