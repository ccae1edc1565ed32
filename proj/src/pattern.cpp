#include "probeable/pattern.hpp"

#include <regex>

#include "probeable/error.hpp"

namespace probeable {

const char *to_string(PatternKind kind) noexcept {
    switch (kind) {
        case PatternKind::literal: return "literal";
        case PatternKind::wildcard: return "wildcard";
        case PatternKind::regex: return "regex";
    }
    return "?";
}

std::string normalize_output(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        auto end = line.find_last_not_of(" \t\r\f\v");
        out.append(line.substr(0, end == std::string_view::npos ? 0 : end + 1));
        if (nl == std::string_view::npos) break;
        out += '\n';
        pos = nl + 1;
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

bool match_output(std::string_view actual, const OutputPattern &pattern) {
    switch (pattern.kind) {
        case PatternKind::wildcard: return true;
        case PatternKind::literal: return normalize_output(actual) == normalize_output(pattern.body);
        case PatternKind::regex: {
            std::regex re;
            try {
                re = std::regex(pattern.body, std::regex::ECMAScript);
            } catch (const std::regex_error &e) {
                throw PatternError("malformed regex '" + pattern.body + "': " + e.what());
            }
            return std::regex_match(normalize_output(actual), re);
        }
    }
    return false;
}

}  // namespace probeable
