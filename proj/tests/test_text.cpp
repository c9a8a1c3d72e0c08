#include <doctest.h>

#include "crm/text.hpp"

namespace text = crm::text;

TEST_CASE("tokenize lowercases and splits on punctuation") {
    auto toks = text::tokenize("A cup, pouring Tea!  (brown)");
    REQUIRE(toks.size() == 5);
    CHECK(toks[0] == "a");
    CHECK(toks[1] == "cup");
    CHECK(toks[2] == "pouring");
    CHECK(toks[3] == "tea");
    CHECK(toks[4] == "brown");
}

TEST_CASE("split_whitespace keeps punctuation") {
    auto toks = text::split_whitespace("  a b,c \n d ");
    REQUIRE(toks.size() == 3);
    CHECK(toks[1] == "b,c");
}

TEST_CASE("stem strips common suffixes") {
    CHECK(text::stem("bottles") == "bottle");
    CHECK(text::stem("bottle") == "bottle");
    CHECK(text::stem("pouring") == "pour");
    CHECK(text::stem("poured") == "pour");
    CHECK(text::stem("masked") == "mask");
    CHECK(text::stem("hanging") == "hang");
    CHECK(text::stem("hangs") == "hang");
    CHECK(text::stem("glasses") == "glass");
    CHECK(text::stem("bodies") == text::stem("body"));
    CHECK(text::stem("Panda") == "panda");
}

TEST_CASE("numeric tokens") {
    CHECK(text::is_numeric_token("123"));
    CHECK(text::is_numeric_token("3.14"));
    CHECK(text::is_numeric_token("85.72%"));
    CHECK(text::is_numeric_token("-5"));
    CHECK_FALSE(text::is_numeric_token("abc123"));
    CHECK_FALSE(text::is_numeric_token("..."));
}

TEST_CASE("content terms drop stopwords and dedupe") {
    auto terms = text::content_terms("a transparent plastic bottle hanging from the hook");
    CHECK(terms == std::vector<std::string>{"transparent", "plastic", "bottle", "hang",
                                            "hook"});
    CHECK(text::content_terms("the the the").empty());
}
