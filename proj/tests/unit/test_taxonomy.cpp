#include <doctest.h>

#include "../support.hpp"

#include "antirip/errors.hpp"
#include "antirip/taxonomy.hpp"

#include <algorithm>

using namespace antirip;

namespace {

PostRecord post(std::string text) {
    PostRecord p;
    p.channel_id = "c";
    p.post_id = 1;
    p.text = std::move(text);
    return p;
}

RuleClassifier rules() {
    const auto& cat = testing::fixture_catalog();
    return RuleClassifier(RuleBook::load(testing::data_dir()),
                          [&cat](const PostRecord& p) { return !match(p, cat).empty(); });
}

std::vector<Leaf> leaves(const PostVerdict& v) {
    std::vector<Leaf> out;
    for (const auto& l : v.labels) out.push_back(l.label.leaf);
    return out;
}

class Scripted final : public ClassifierAdapter {
public:
    bool said = false;
    bool categorized = false;
    bool detect(const PostRecord&, const PostContext&) override { return said; }
    PostVerdict categorize(const PostRecord&, const PostContext&) override {
        categorized = true;
        throw NoLabelMatch("nothing fits");
    }
};

} // namespace

TEST_CASE("taxonomy schema") {
    CHECK(all_leaves().size() == 25);
    std::map<LabelGroup, std::size_t> per_group;
    for (auto l : all_leaves()) {
        ++per_group[group_of(l)];
        CHECK(leaf_from_string(to_string(l)) == l);
    }
    CHECK(per_group[LabelGroup::InternalDistribution] == 2);
    CHECK(per_group[LabelGroup::ExternalDistribution] == 2);
    CHECK(per_group[LabelGroup::ResilienceStrategies] == 4);
    CHECK(per_group[LabelGroup::FacilitatingAccess] == 4);
    CHECK(per_group[LabelGroup::BotCategories] == 4);
    CHECK(per_group[LabelGroup::CommunityGrowth] == 3);
    CHECK(per_group[LabelGroup::Monetization] == 3);
    CHECK(per_group[LabelGroup::PresentationAccessibility] == 3);
    CHECK(group_of(Leaf::forced_join) == LabelGroup::CommunityGrowth);
    CHECK_FALSE(leaf_from_string("nonsense").has_value());
}

TEST_CASE("group priority") {
    const auto p = default_group_priority();
    CHECK(p.front() == LabelGroup::InternalDistribution);
    CHECK(p[4] == LabelGroup::Monetization);
    CHECK(p[5] == LabelGroup::CommunityGrowth);
    const auto custom = parse_group_priority(
        "Monetization,InternalDistribution,ExternalDistribution,ResilienceStrategies,FacilitatingAccess,"
        "BotCategories,CommunityGrowth,PresentationAccessibility");
    CHECK(custom.front() == LabelGroup::Monetization);
    CHECK_THROWS_AS(parse_group_priority("Monetization"), InvalidConfig);
}

TEST_CASE("rule classifier: reference examples") {
    auto rc = rules();
    PostContext ctx;

    auto big = post("Granite Harbor (2019) 1080p WEB-DL");
    big.attachment = Attachment{"granite.harbor.2019.1080p.mkv", 2147483648ULL};
    REQUIRE(rc.detect(big, ctx));
    CHECK(rc.categorize(big, ctx).primary()->leaf == Leaf::direct_download);

    const auto cloud = post("New episodes 720p|1080p https://www.terabox.com/s/1abcDEF");
    REQUIRE(rc.detect(cloud, ctx));
    const auto cv = rc.categorize(cloud, ctx);
    CHECK(leaves(cv) == std::vector<Leaf>{Leaf::cloud_storage, Leaf::resolution_encoding});

    const auto backup = post("join our backup channel t.me/x_backup");
    REQUIRE(rc.detect(backup, ctx));
    CHECK(leaves(rc.categorize(backup, ctx)) == std::vector<Leaf>{Leaf::backup_channel, Leaf::channel_referral});

    CHECK_FALSE(rc.detect(post(""), ctx));
    CHECK_FALSE(rc.detect(post("Review: the new trailer for The Office reunion looks great"), ctx));
}

TEST_CASE("rule classifier: verdict shape and bot-only labels") {
    auto rc = rules();
    const auto& cat = testing::fixture_catalog();
    const auto corpus = generate_post_corpus(21, 300, 0.5, cat.entries());
    for (const auto& g : corpus) {
        PostContext ctx;
        const auto v = classify_post(rc, g.post, ctx);
        CHECK(verdict_well_formed(v));
        CHECK(v.labels.size() <= kMaxLabels);
        for (const auto& l : v.labels) {
            CHECK(l.label.group() != LabelGroup::BotCategories);
            CHECK_FALSE(l.justification.empty());
        }
        CHECK(classify_post(rc, g.post, ctx).labels == v.labels);
    }
    PostContext bot;
    bot.author_is_bot = true;
    auto delivery = post("Send me the movie name and I will send you the file");
    delivery.attachment = Attachment{"granite.harbor.mkv", 1500000000};
    const auto labels = rc.matching_leaves(delivery, bot);
    CHECK(std::any_of(labels.begin(), labels.end(),
                      [](const LabelAssignment& a) { return a.label.group() == LabelGroup::BotCategories; }));
}

TEST_CASE("classify_post: detector/categorizer disagreement") {
    Scripted s;
    bool unlabeled = false;
    auto v = classify_post(s, post("x"), {}, &unlabeled);
    CHECK_FALSE(v.is_piracy);
    CHECK_FALSE(s.categorized);
    s.said = true;
    v = classify_post(s, post("x"), {}, &unlabeled);
    CHECK(v.is_piracy);
    CHECK(v.labels.empty());
    CHECK(unlabeled);
}

TEST_CASE("verdict well-formedness") {
    PostVerdict v{{"c", 1}, false, {}};
    CHECK(verdict_well_formed(v));
    v.labels.push_back({{Leaf::direct_download}, "x"});
    CHECK_FALSE(verdict_well_formed(v));
    v.is_piracy = true;
    CHECK(verdict_well_formed(v));
    v.labels.push_back({{Leaf::direct_download}, "dup"});
    CHECK_FALSE(verdict_well_formed(v));
    v.labels.back().label.leaf = Leaf::forced_join;
    v.labels.push_back({{Leaf::premium_tier}, "y"});
    CHECK(verdict_well_formed(v));
    v.labels.push_back({{Leaf::subtitles_dubs}, "z"});
    CHECK_FALSE(verdict_well_formed(v));
}

TEST_CASE("evaluate") {
    std::vector<PostVerdict> truth{
        {{"c", 1}, true, {{{Leaf::backup_channel}, ""}, {{Leaf::channel_referral}, ""}}},
        {{"c", 2}, true, {{{Leaf::direct_download}, ""}}},
        {{"c", 3}, false, {}},
    };
    auto perfect = evaluate(truth, truth);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.primary_accuracy == 1.0);
    CHECK(perfect.primary_s1_s2_accuracy == 1.0);

    std::vector<PostVerdict> benign;
    for (const auto& t : truth) benign.push_back({t.post, false, {}});
    auto none = evaluate(benign, truth);
    CHECK(none.recall == 0.0);
    CHECK(none.primary_accuracy == 0.0);

    auto wrong_secondary = truth;
    wrong_secondary[0].labels[1].label.leaf = Leaf::forced_join;
    const auto m = evaluate(wrong_secondary, truth);
    CHECK(m.primary_accuracy == 1.0);
    CHECK(m.primary_s1_accuracy == 0.5);

    CHECK_THROWS_AS(evaluate(benign, {}), LengthMismatch);
}

TEST_CASE("evaluate: cumulative accuracies never increase") {
    auto rc = rules();
    const auto corpus = generate_post_corpus(4, 400, 0.5, testing::fixture_catalog().entries(), 0.2);
    std::vector<PostVerdict> got, want;
    for (const auto& g : corpus) {
        got.push_back(classify_post(rc, g.post, {}));
        want.push_back(g.truth.as_verdict());
    }
    const auto m = evaluate(got, want);
    CHECK(m.primary_accuracy >= m.primary_s1_accuracy);
    CHECK(m.primary_s1_accuracy >= m.primary_s1_s2_accuracy);
    CHECK(m.n == 400);
}
