#include <doctest.h>

#include "friction/text_norm.hpp"

using namespace friction;

TEST_CASE("trim and collapse") {
    CHECK(trim("  a b  ") == "a b");
    CHECK(trim("\n\t x \r\n") == "x");
    CHECK(trim("") == "");
    CHECK(collapse_whitespace("a   b\t\nc") == "a b c");
    CHECK(collapse_whitespace("  a  ") == "a");
}

TEST_CASE("normalize_answer") {
    CHECK(normalize_answer("  Paris  ") == "paris");
    CHECK(normalize_answer("\"Paris, France.\"") == "paris, france");
    CHECK(normalize_answer("PARIS") == normalize_answer("paris"));
    CHECK(normalize_answer("(B)") == "b");
    CHECK(normalize_answer("a   b") == "a b");
    CHECK(normalize_answer("...") == "");
}

TEST_CASE("canonical_number base 10") {
    CHECK(canonical_number("42", 10) == "42");
    CHECK(canonical_number("042", 10) == "42");
    CHECK(canonical_number(" 1,234,567 ", 10) == "1234567");
    CHECK(canonical_number("0", 10) == "0");
    CHECK(canonical_number("000", 10) == "0");
    CHECK(!canonical_number("12a", 10).has_value());
    CHECK(!canonical_number("", 10).has_value());
    CHECK(!canonical_number(",1", 10).has_value());
    CHECK(!canonical_number("1,", 10).has_value());
}

TEST_CASE("canonical_number base 16") {
    CHECK(canonical_number("ab3f", 16) == "AB3F");
    CHECK(canonical_number("0x0AB3F", 16) == "AB3F");
    CHECK(canonical_number("064", 16) == "64");
    CHECK(!canonical_number("G1", 16).has_value());
}

TEST_CASE("numbers_equal") {
    CHECK(numbers_equal("042", "42", 10));
    CHECK(numbers_equal("1,234", "1234", 10));
    CHECK(numbers_equal("ab3f", "AB3F", 16));
    CHECK(!numbers_equal("42", "43", 10));
    CHECK(!numbers_equal("x", "42", 10));
}
