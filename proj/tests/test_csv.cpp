#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intent_miner/csv.hpp"
#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

using namespace im;

TEST_CASE("basic parse") {
    auto t = csv::parse("a,b,c\n1,2,3\n4,5,6\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][2] == "6");
}

TEST_CASE("quoting: commas, quotes, embedded newlines") {
    auto t = csv::parse("x,y\n\"a,b\",\"he said \"\"hi\"\"\"\n\"line1\nline2\",z\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "a,b");
    CHECK(t.rows[0][1] == "he said \"hi\"");
    CHECK(t.rows[1][0] == "line1\nline2");
}

TEST_CASE("crlf endings") {
    auto t = csv::parse("a,b\r\n1,2\r\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "2");
}

TEST_CASE("field count mismatch reports the line") {
    try {
        csv::parse("a,b\n1,2\n1,2,3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("unterminated quote is an error") {
    CHECK_THROWS_AS(csv::parse("a\n\"oops\n"), ParseError);
}

TEST_CASE("escape round trip over random fields") {
    Rng rng(42);
    const std::string alphabet = "ab,\"\n\r x";
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<std::string> fields;
        for (int f = 0; f < 3; ++f) {
            std::string s;
            int len = static_cast<int>(rng.next_below(8));
            for (int i = 0; i < len; ++i) s += alphabet[rng.next_below(alphabet.size())];
            fields.push_back(s);
        }
        // a lone field starting with a quote parses as quoted; escape() guards this
        auto t = csv::parse("h1,h2,h3\n" + csv::to_line(fields));
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0] == fields);
    }
}
