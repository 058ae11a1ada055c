#include <doctest.h>

#include "shopeval/text.hpp"

using namespace shopeval;

TEST_SUITE("text") {

TEST_CASE("collapse_whitespace squeezes runs and trims ends") {
    CHECK(collapse_whitespace("  a\t\tb\n c  ") == "a b c");
    CHECK(collapse_whitespace("plain") == "plain");
    CHECK(collapse_whitespace("   ") == "");
}

TEST_CASE("truncate_chars cuts at the byte limit") {
    CHECK(truncate_chars("abcdef", 4) == "abcd");
    CHECK(truncate_chars("ab", 4) == "ab");
    CHECK(truncate_chars("", 4) == "");
}

TEST_CASE("trim strips surrounding whitespace only") {
    CHECK(trim(" \t x y \n") == "x y");
    CHECK(trim("xy") == "xy");
    CHECK(trim("  ") == "");
}

TEST_CASE("tokenize_words lowercases and splits on non-alphanumerics") {
    const auto words = tokenize_words("Hello, WORLD-42! ok");
    REQUIRE(words.size() == 4);
    CHECK(words[0] == "hello");
    CHECK(words[1] == "world");
    CHECK(words[2] == "42");
    CHECK(words[3] == "ok");
}

TEST_CASE("mostly_ascii_english needs letters and a high ascii share") {
    CHECK(mostly_ascii_english("a plain sentence"));
    CHECK_FALSE(mostly_ascii_english("12345 678"));
    CHECK_FALSE(mostly_ascii_english("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9"));
}

TEST_CASE("format_double round-trips doubles exactly") {
    for (double x : {0.0, 1.0, -1.5, 0.1, 3.141592653589793, 1e-300, -2.2250738585072014e-308}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("strip_code_fence unwraps fenced blocks") {
    CHECK(strip_code_fence("```json\n{\"a\":1}\n```") == "{\"a\":1}");
    CHECK(strip_code_fence("```\n{}\n```") == "{}");
    CHECK(strip_code_fence("  {\"a\":1}  ") == "{\"a\":1}");
    CHECK(strip_code_fence("no fence") == "no fence");
    CHECK(strip_code_fence("```broken") == "```broken");
}

}  // TEST_SUITE
