#include <doctest.h>

#include "../support.hpp"

#include "antirip/catalog.hpp"
#include "antirip/errors.hpp"
#include "antirip/text.hpp"

#include <fstream>

using namespace antirip;

namespace {

PostRecord post(std::string text) {
    PostRecord p;
    p.channel_id = "c";
    p.post_id = 7;
    p.text = std::move(text);
    return p;
}

CatalogEntry entry(std::string id, std::string title, int year, std::vector<std::string> companies = {}) {
    CatalogEntry e;
    e.id = std::move(id);
    e.title = std::move(title);
    e.year = year;
    e.companies = std::move(companies);
    return e;
}

} // namespace

TEST_CASE("ingest filter") {
    const auto& cat = testing::fixture_catalog();
    CHECK(cat.stats().read == 500);
    CHECK(cat.stats().too_old >= 1);
    CHECK(cat.stats().stoplisted >= 1);
    CHECK(cat.find("old-1975") == nullptr);
    CHECK(cat.find("love") == nullptr);
    CHECK(cat.find("love-actually") != nullptr);
    for (const auto& e : cat.entries()) CHECK(e.year >= kCatalogMinYear);
}

TEST_CASE("ingest reports the bad line") {
    const auto dir = testing::scratch("catalog_bad");
    {
        std::ofstream out(dir / "c.jsonl");
        out << R"({"id":"a","title":"Granite Harbor","year":2001})" << '\n' << "{not json\n";
    }
    try {
        ingest_catalog(dir / "c.jsonl", {});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("The Office tie rule") {
    const auto& cat = testing::fixture_catalog();
    const auto us = match(post("The Office US S03 720p"), cat);
    REQUIRE(us.size() == 1);
    CHECK(us[0].entry_id == "office-us");
    CHECK_FALSE(us[0].ambiguous);

    const auto uk = match(post("The Office (2001) complete series"), cat);
    REQUIRE(uk.size() == 1);
    CHECK(uk[0].entry_id == "office-uk");

    const auto both = match(post("The Office complete"), cat);
    REQUIRE(both.size() == 2);
    CHECK(both[0].ambiguous);
    CHECK(both[1].ambiguous);
    CHECK(both[0].entry_id == "office-uk");

    CHECK(match(post("no titles here 1080p"), cat).empty());
}

TEST_CASE("fuzzy matching and shadowing") {
    const auto cat = Catalog::from_entries(
        {entry("a", "Granite Harbor", 2010), entry("b", "Granite Harbor Returns", 2014), entry("c", "Up", 2009),
         entry("d", "Home", 2015)},
        Stoplist{{"home"}});
    CHECK(cat.find("d") == nullptr);

    auto m = match(post("Granit Harbor 1080p"), cat);
    REQUIRE(m.size() == 1);
    CHECK(m[0].entry_id == "a");
    // Every aligned pair is within edit distance one.
    for (const auto& [p, t] : m[0].matched_tokens) CHECK(text::bounded_edit_distance(p, t, 1) <= 1);

    m = match(post("Granite Harbor Returns full movie"), cat);
    REQUIRE(m.size() == 1);
    CHECK(m[0].entry_id == "b");

    CHECK(match(post("Granxte Hxrbor"), cat).empty());
    CHECK(match(post("Ip"), cat).empty());
    CHECK(match(post("Up"), cat).size() == 1);

    const auto again = match(post("Granite Harbor and Up tonight"), cat);
    REQUIRE(again.size() == 2);
    CHECK(match(post("Granite Harbor and Up tonight"), cat)[0].entry_id == again[0].entry_id);
    CHECK(again[0].confidence >= again[1].confidence);
}

TEST_CASE("threshold is configurable") {
    const auto cat = Catalog::from_entries({entry("a", "Granite Harbor Night Run", 2010)}, {});
    MatchOptions loose;
    loose.threshold = 0.7;
    CHECK(match(post("Granite Harbor Night Out"), cat).empty());
    CHECK(match(post("Granite Harbor Night Out"), cat, loose).size() == 1);
}

TEST_CASE("stoplist") {
    const auto s = Stoplist::load(testing::data_dir() / "stoplist.txt");
    CHECK(s.blocks("Love"));
    CHECK(s.blocks("  HOME "));
    CHECK_FALSE(s.blocks("Love Actually"));
}
