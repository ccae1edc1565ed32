#pragma once

#include <string>

#include "probeable/value.hpp"

// Deliberately naive re-implementations of the bundled problems, written
// without looking at the library oracles. Defaults only (occurrence
// counting, "NO EVENS", 0-based indices, "-").
namespace probeable::testing::brute {

std::string count_between(const IntArray &values, std::int64_t n, std::int64_t a, std::int64_t b);
std::string smallest_even(const IntArray &values, std::int64_t n);
std::string first_vowel(const std::string &s);

// Dispatch on problem id with bank-style args.
std::string answer(const std::string &problem_id, const ProbeArgs &args);

}  // namespace probeable::testing::brute
