#include <gtest/gtest.h>

#include "probeable/error.hpp"
#include "probeable/pattern.hpp"
#include "support/generators.hpp"

namespace probeable {
namespace {

TEST(Pattern, NormalizationStripsTrailingWhitespace) {
    EXPECT_EQ(normalize_output("3\n"), "3");
    EXPECT_EQ(normalize_output("4 2  \n\n\n"), "4 2");
    EXPECT_EQ(normalize_output("a \t\nb\r\n"), "a\nb");
    EXPECT_EQ(normalize_output(""), "");
}

TEST(Pattern, LiteralComparesNormalized) {
    EXPECT_TRUE(match_output("3\n", OutputPattern::literal("3")));
    EXPECT_FALSE(match_output("31\n", OutputPattern::literal("3")));
    EXPECT_FALSE(match_output(" 3\n", OutputPattern::literal("3")));
}

TEST(Pattern, RegexIsFullMatch) {
    EXPECT_TRUE(match_output("2 0\n", OutputPattern::regex("[0-9]+( [0-9]+)*")));
    EXPECT_FALSE(match_output("x2 0\n", OutputPattern::regex("[0-9]+( [0-9]+)*")));
    EXPECT_THROW(match_output("x", OutputPattern::regex("(")), PatternError);
}

TEST(PatternProperty, WildcardMatchesAnything) {
    testing::Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_TRUE(match_output(testing::random_bytes(rng, 64), OutputPattern::wildcard()));
    }
}

TEST(PatternProperty, NormalizationIsIdempotent) {
    testing::Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const auto s = testing::random_bytes(rng, 32) + "  \n\n";
        const auto once = normalize_output(s);
        ASSERT_EQ(normalize_output(once), once);
        ASSERT_TRUE(match_output(s, OutputPattern::literal(once)));
    }
}

}  // namespace
}  // namespace probeable
