#include <doctest.h>

#include "../support.hpp"

#include "antirip/errors.hpp"
#include "antirip/loss.hpp"
#include "antirip/rng.hpp"

using namespace antirip;

namespace {

PricingEntry rental(const std::string& id, double cost, const std::string& cur = "USD") {
    PricingEntry e;
    e.title_id = id;
    e.region = "*";
    e.rental = Price{cost, cur};
    return e;
}

PricingEntry streaming(const std::string& id, const std::string& region, std::vector<StreamingOffer> offers) {
    PricingEntry e;
    e.title_id = id;
    e.region = region;
    e.streaming = std::move(offers);
    return e;
}

ViewedTitle viewed(const std::string& id, std::uint64_t views, const std::string& region = "US", std::int64_t post = 1) {
    return {id, {"c", post}, views, region};
}

} // namespace

TEST_CASE("consumption floor") {
    static_assert(consumptions_for(99) == 0);
    static_assert(consumptions_for(100) == 1);
    static_assert(consumptions_for(250) == 2);
    for (std::uint64_t v = 0; v < 2000; v += 7) {
        std::uint64_t units = 0;
        for (std::uint64_t i = 1; i <= v; ++i) units += i % 100 == 0;
        CHECK(consumptions_for(v) == units);
    }
}

TEST_CASE("estimate: reference examples") {
    PricingTable pricing;
    pricing.add(rental("r", 3.99));
    pricing.add(streaming("s1", "*", {{"Streamly", 7.99, "USD"}}));
    pricing.add(streaming("s2", "*", {{"Streamly", 9.49, "USD"}, {"Reelbox", 12.0, "USD"}}));
    const ExchangeTable fx;

    auto est = estimate({viewed("r", 100)}, pricing, fx);
    REQUIRE(est.groups.size() == 1);
    CHECK(est.groups[0].consumptions == 1);
    CHECK(est.total_usd == doctest::Approx(3.99));

    est = estimate({viewed("r", 99)}, pricing, fx);
    CHECK(est.total_usd == 0.0);

    est = estimate({viewed("s1", 300, "US", 1), viewed("s2", 200, "US", 2)}, pricing, fx);
    REQUIRE(est.groups.size() == 1);
    CHECK(est.groups[0].key == "Streamly|US");
    CHECK(est.groups[0].consumptions == 5);
    CHECK(est.groups[0].unit_cost_usd == doctest::Approx(7.99));
    CHECK(est.total_usd == doctest::Approx(39.95));
}

TEST_CASE("estimate: regions, fallbacks and unpriced items") {
    PricingTable pricing;
    pricing.add(streaming("s", "*", {{"Streamly", 7.99, "USD"}}));
    pricing.add(streaming("s", "IN", {{"Kinora", 199, "INR"}}));
    PricingEntry phys;
    phys.title_id = "p";
    phys.region = "*";
    phys.physical = {{19.99, "USD"}, {12.0, "EUR"}};
    pricing.add(phys);
    pricing.add(rental("odd", 5, "XXX"));
    ExchangeTable fx;
    fx.rates = {{"USD", 1.0}, {"INR", 0.012}, {"EUR", 1.1}};

    const auto est = estimate({viewed("s", 200, "US"), viewed("s", 300, "IN"), viewed("p", 100),
                               viewed("odd", 500), viewed("unknown", 900)},
                              pricing, fx);
    std::map<std::string, const LossGroup*> by_key;
    for (const auto& g : est.groups) by_key[g.key] = &g;
    REQUIRE(by_key.count("Streamly|US"));
    REQUIRE(by_key.count("Kinora|IN"));
    REQUIRE(by_key.count("p|US"));
    CHECK(by_key["Kinora|IN"]->loss_usd == doctest::Approx(3 * 199 * 0.012));
    CHECK(by_key["p|US"]->unit_cost_usd == doctest::Approx(13.2));
    CHECK(by_key["p|US"]->mode == AccessMode::physical);
    CHECK(est.unpriced.size() == 2);
    double sum = 0;
    for (const auto& g : est.groups) {
        sum += g.loss_usd;
        CHECK(g.consumptions == consumptions_for(g.views_total));
        CHECK(g.loss_usd >= 0);
    }
    CHECK(est.total_usd == doctest::Approx(sum));
}

TEST_CASE("estimate: adding views never lowers the total") {
    PricingTable pricing;
    for (int t = 0; t < 5; ++t) {
        const auto id = "t" + std::to_string(t);
        if (t % 2) pricing.add(rental(id, 2.5 + t));
        else pricing.add(streaming(id, "*", {{t == 0 ? "Streamly" : "Reelbox", 5.0 + t, "USD"}}));
    }
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        std::vector<ViewedTitle> items;
        for (int k = 0; k < 6; ++k) {
            items.push_back(viewed("t" + std::to_string(rng.below(5)), rng.below(400), rng.chance(0.5) ? "US" : "IN", k));
        }
        const double before = estimate(items, pricing, {}).total_usd;
        items[rng.below(items.size())].views += rng.below(300);
        CHECK(estimate(items, pricing, {}).total_usd >= before);
    }
}

TEST_CASE("pricing and fx validation") {
    PricingTable pricing;
    PricingEntry empty;
    empty.title_id = "x";
    empty.region = "*";
    CHECK_THROWS_AS(pricing.add(empty), InvalidSpec);
    CHECK_THROWS_AS(pricing.add(rental("x", -1)), InvalidSpec);

    ExchangeTable fx;
    CHECK_THROWS_AS(fx.to_usd(1, "EUR"), MissingFxRate);
    fx.rates["EUR"] = 0;
    CHECK_THROWS_AS(fx.validate(), InvalidSpec);

    const auto shipped = ExchangeTable::load(testing::data_dir() / "fx.json");
    CHECK_NOTHROW(shipped.validate());
    CHECK(shipped.as_of == "2026-01-01");
    const auto table = load_pricing(testing::data_dir() / "pricing.jsonl");
    CHECK(table.find("office-us", "US") != nullptr);
}

TEST_CASE("region inference") {
    const auto map = LanguageMap::load(testing::data_dir() / "languages.txt");
    PostRecord p;
    p.language_tag = "fa";
    CHECK(infer_region(p, map) == "IR");
    p.language_tag = "en";
    CHECK(infer_region(p, map) == "US");
    p.language_tag = "pt-BR";
    CHECK(infer_region(p, map) == "BR");
    p.language_tag = std::nullopt;
    CHECK(infer_region(p, map) == "ZZ");
    p.language_tag = "xx";
    CHECK(infer_region(p, map) == "ZZ");
}

TEST_CASE("viewed titles and rollup") {
    const auto& cat = testing::fixture_catalog();
    PostRecord a;
    a.channel_id = "c";
    a.post_id = 1;
    a.view_count = 400;
    a.language_tag = "en";
    PostRecord b = a;
    b.post_id = 2;
    PostVerdict va{{"c", 1}, true, {{{Leaf::direct_download}, "x"}}};
    PostVerdict vb{{"c", 2}, false, {}};
    TitleMatch amb{"office-uk", {"c", 1}, 1.0, true, {}};
    TitleMatch good{"office-us", {"c", 1}, 0.9, false, {}};
    std::map<PostKey, std::vector<TitleMatch>> matches{{{"c", 1}, {amb, good}}, {{"c", 2}, {good}}};
    const auto items = viewed_titles({a, b}, {va, vb}, matches, LanguageMap::load(testing::data_dir() / "languages.txt"));
    REQUIRE(items.size() == 1);
    CHECK(items[0].title_id == "office-us");
    CHECK(items[0].views == 400);
    CHECK(items[0].region == "US");

    const auto est = estimate(items, load_pricing(testing::data_dir() / "pricing.jsonl"),
                              ExchangeTable::load(testing::data_dir() / "fx.json"));
    const auto cells = rollup(est, cat);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].country == "US");
    CHECK(cells[0].kind == MediaKind::tv);
    CHECK(cells[0].loss_usd == doctest::Approx(est.total_usd));
    const auto report = loss_report_json(est, cells);
    CHECK(report.contains("method"));
    CHECK(report["total_usd"].get<double>() == doctest::Approx(4 * 5.99));
}
