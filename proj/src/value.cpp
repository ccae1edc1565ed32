#include "probeable/value.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "probeable/error.hpp"

namespace probeable {

const char *to_string(ParamKind kind) noexcept {
    switch (kind) {
        case ParamKind::integer: return "int";
        case ParamKind::int_array: return "int-array";
        case ParamKind::string: return "string";
    }
    return "?";
}

std::optional<ParamKind> param_kind_from_string(const std::string &s) noexcept {
    if (s == "int") return ParamKind::integer;
    if (s == "int-array") return ParamKind::int_array;
    if (s == "string") return ParamKind::string;
    return std::nullopt;
}

ParamKind kind_of(const ProbeValue &v) noexcept {
    switch (v.index()) {
        case 0: return ParamKind::integer;
        case 1: return ParamKind::int_array;
        default: return ParamKind::string;
    }
}

std::string c_string_literal(const std::string &s) {
    std::string out = "\"";
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20 || c > 0x7e) {
                    out += fmt::format("\\{:03o}", c);
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
    return out;
}

std::string render_value(const ProbeValue &v) {
    if (const auto *i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const auto *arr = std::get_if<IntArray>(&v)) return fmt::format("{{{}}}", fmt::join(*arr, ", "));
    return c_string_literal(std::get<std::string>(v));
}

std::string render_call(const std::string &function, const ProbeArgs &args) {
    std::string out = function + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += render_value(args[i]);
    }
    out += ")";
    return out;
}

nlohmann::json value_to_json(const ProbeValue &v) {
    return std::visit([](const auto &x) { return nlohmann::json(x); }, v);
}

ProbeValue value_from_json(const nlohmann::json &j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) {
        IntArray out;
        out.reserve(j.size());
        for (const auto &e : j) {
            if (!e.is_number_integer()) throw SignatureError("", "array elements must be integers");
            out.push_back(e.get<std::int64_t>());
        }
        return out;
    }
    throw SignatureError("", "argument must be an integer, an integer array or a string");
}

nlohmann::json args_to_json(const ProbeArgs &args) {
    auto out = nlohmann::json::array();
    for (const auto &a : args) out.push_back(value_to_json(a));
    return out;
}

ProbeArgs args_from_json(const nlohmann::json &j) {
    if (!j.is_array()) throw SignatureError("", "args must be an array");
    ProbeArgs out;
    out.reserve(j.size());
    for (const auto &e : j) out.push_back(value_from_json(e));
    return out;
}

}  // namespace probeable
