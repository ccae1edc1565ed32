#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace probeable {

using IntArray = std::vector<std::int64_t>;

// One typed probe argument: int | int-array | string.
using ProbeValue = std::variant<std::int64_t, IntArray, std::string>;
using ProbeArgs = std::vector<ProbeValue>;

enum class ParamKind { integer, int_array, string };

const char *to_string(ParamKind kind) noexcept;
std::optional<ParamKind> param_kind_from_string(const std::string &s) noexcept;

ParamKind kind_of(const ProbeValue &v) noexcept;

// {1, 2, 3} / 5 / "apple" -- the form shown to students.
std::string render_value(const ProbeValue &v);
// "CountBetween({1, 2, 3}, 3, 0, 5)"
std::string render_call(const std::string &function, const ProbeArgs &args);

// C source expression for a value; arrays are emitted as a declared local.
std::string c_string_literal(const std::string &s);

nlohmann::json value_to_json(const ProbeValue &v);
// Untyped decode: numbers -> int, arrays -> int-array, strings -> string.
// Throws SignatureError on anything else.
ProbeValue value_from_json(const nlohmann::json &j);
nlohmann::json args_to_json(const ProbeArgs &args);
ProbeArgs args_from_json(const nlohmann::json &j);

struct ProbeRequest {
    std::string problem_id;
    ProbeArgs args;

    bool operator==(const ProbeRequest &) const = default;
};

}  // namespace probeable
