#include <doctest.h>

#include "autoform/scan.hpp"

using namespace autoform::scan;

TEST_CASE("quotes, comments and cartouches are reported with delimiters") {
    auto r = scan_regions("word \"a \\<in> b\" (* note *) text\\<open>nl\\<close>");
    REQUIRE(r.quotes.size() == 1);
    REQUIRE(r.comments.size() == 1);
    REQUIRE(r.cartouches.size() == 1);
    CHECK(r.problems.empty());
    std::string_view text = "word \"a \\<in> b\" (* note *) text\\<open>nl\\<close>";
    CHECK(span_content(text, r.quotes[0], 1, 1) == "a \\<in> b");
    CHECK(span_content(text, r.comments[0], 2, 2) == " note ");
    CHECK(span_content(text, r.cartouches[0], 7, 8) == "nl");
}

TEST_CASE("comments nest and may contain quotes") {
    auto r = scan_regions("(* outer \"quoted\" (* inner *) tail *) lemma");
    REQUIRE(r.comments.size() == 1);
    CHECK(r.comments[0].begin == 0);
    CHECK(r.quotes.empty());
    REQUIRE(r.words.size() == 1);
    CHECK(r.words[0].text == "lemma");
}

TEST_CASE("cartouches nest and hide quotes and comment markers") {
    auto r = scan_regions("text\\<open>a \\<open>b\\<close> \"q\" (* c *)\\<close> end");
    REQUIRE(r.cartouches.size() == 1);
    CHECK(r.quotes.empty());
    CHECK(r.comments.empty());
    REQUIRE(r.words.size() == 2);
    CHECK(r.words[0].text == "text");
    CHECK(r.words[1].text == "end");
}

TEST_CASE("escaped quotes stay inside the formula") {
    auto r = scan_regions("\"a \\\" b\" tail");
    REQUIRE(r.quotes.size() == 1);
    CHECK(r.problems.empty());
    REQUIRE(r.words.size() == 1);
    CHECK(r.words[0].text == "tail");
}

TEST_CASE("unterminated regions are reported at their opener") {
    auto quote = scan_regions("lemma \"never closed");
    REQUIRE(quote.problems.size() == 1);
    CHECK(quote.problems[0].offset == 6);

    auto comment = scan_regions("ok (* dangling");
    REQUIRE(comment.problems.size() == 1);
    CHECK(comment.problems[0].offset == 3);

    auto cartouche = scan_regions("text\\<open>open forever");
    REQUIRE(cartouche.problems.size() == 1);
    CHECK(cartouche.problems[0].offset == 4);
}

TEST_CASE("stray closers are flagged") {
    CHECK(scan_regions("a *) b").problems.size() == 1);
    CHECK(scan_regions("a \\<close> b").problems.size() == 1);
}

TEST_CASE("neutral_at distinguishes region interiors") {
    std::string_view text = "ab \"cd\" (* ef *)";
    auto r = scan_regions(text);
    CHECK(r.neutral_at(0));    // 'a'
    CHECK_FALSE(r.neutral_at(4));   // 'c' inside the quote
    CHECK_FALSE(r.neutral_at(11));  // 'e' inside the comment
    CHECK(r.neutral_at(7));    // space between regions
}

TEST_CASE("words include identifiers with underscores and primes") {
    auto r = scan_regions("lemma Int_ZF_1_5_L7A: shows x'");
    REQUIRE(r.words.size() == 4);
    CHECK(r.words[1].text == "Int_ZF_1_5_L7A");
    CHECK(r.words[3].text == "x'");
    bool saw_colon = false;
    for (const auto& p : r.punct) saw_colon = saw_colon || p.ch == ':';
    CHECK(saw_colon);
}
