#include <doctest.h>

#include "../support.hpp"

#include "antirip/crawler.hpp"
#include "antirip/errors.hpp"
#include "antirip/rng.hpp"

using namespace antirip;

namespace {

constexpr Timestamp kNow = 1767225600;

/// Channel `name` (handle name + "_chan") with one post linking to each target.
void add_linking(SimulatedPlatform& sim, const std::string& name, const std::vector<std::string>& targets,
                 Timestamp earliest = kNow - kSecondsPerDay) {
    std::vector<PostRecord> posts;
    std::int64_t id = 1;
    PostRecord first;
    first.channel_id = name;
    first.post_id = id++;
    first.time = earliest;
    first.text = "welcome";
    posts.push_back(first);
    for (const auto& t : targets) {
        PostRecord p;
        p.channel_id = name;
        p.post_id = id;
        p.time = earliest + id;
        ++id;
        p.text = "Join https://t.me/" + t;
        posts.push_back(p);
    }
    const bool bot = looks_like_bot_handle(name);
    sim.add_entity({name, name, name, 10, earliest, bot}, bot ? std::vector<PostRecord>{} : posts);
}

std::string chan(const std::string& s) { return s + "_chan"; }

std::map<std::string, int> depths(const DiscoveryResult& d) {
    std::map<std::string, int> out;
    for (const auto& e : d.channels) out[e.record.id] = e.depth;
    for (const auto& e : d.bots) out[e.record.id] = e.depth;
    return out;
}

std::vector<ChannelRecord> seeds_of(SimulatedPlatform& sim, std::initializer_list<std::string> handles) {
    std::vector<ChannelRecord> out;
    for (const auto& h : handles) out.push_back(*sim.resolve_handle(h));
    return out;
}

} // namespace

TEST_CASE("recency gate") {
    ChannelRecord c;
    c.earliest_post_time = kNow - 6 * kSecondsPerDay;
    CHECK(recency_gate(c, kNow, 7));
    c.earliest_post_time = kNow - 8 * kSecondsPerDay;
    CHECK_FALSE(recency_gate(c, kNow, 7));
    c.earliest_post_time = kNow - 7 * kSecondsPerDay;
    CHECK(recency_gate(c, kNow, 7));
    c.earliest_post_time = kNow - 7 * kSecondsPerDay - 1;
    CHECK_FALSE(recency_gate(c, kNow));
}

TEST_CASE("probe") {
    SimulatedPlatform sim;
    for (auto h : {"alpha_chan", "bravo_chan", "charlie_chan"}) add_linking(sim, h, {});
    CandidateSet set;
    for (int i = 0; i < 97; ++i) set.candidates.push_back("nothing_" + std::to_string(i));
    set.candidates.insert(set.candidates.begin() + 10, "alpha_chan");
    set.candidates.insert(set.candidates.begin() + 40, "bravo_chan");
    set.candidates.push_back("charlie_chan");
    ProbeStats stats;
    const auto found = probe(sim, set, &stats);
    REQUIRE(found.size() == 3);
    CHECK(found[0].id == "alpha_chan");
    CHECK(stats.probed == 100);
    CHECK(stats.unresolved == 97);

    CandidateSet none{{"nothing_1", "nothing_2"}, 0};
    CHECK(probe(sim, none).empty());

    sim.reset_counters();
    CandidateSet bad{{"1bad", "abc"}, 0};
    ProbeStats bad_stats;
    CHECK(probe(sim, bad, &bad_stats).empty());
    CHECK(bad_stats.rejected == 2);
    CHECK(sim.resolve_count() == 0);

    CHECK_THROWS_AS(probe(sim, CandidateSet{}), std::invalid_argument);
}

TEST_CASE("expand: depth bound on a chain") {
    SimulatedPlatform sim;
    add_linking(sim, chan("a"), {chan("b")});
    add_linking(sim, chan("b"), {chan("c")});
    add_linking(sim, chan("c"), {chan("d")});
    add_linking(sim, chan("d"), {});
    const auto d = expand(sim, seeds_of(sim, {chan("a")}));
    CHECK(depths(d) == std::map<std::string, int>{{chan("a"), 0}, {chan("b"), 1}, {chan("c"), 2}});

    CrawlOptions zero;
    zero.max_depth = 0;
    const auto only_seed = expand(sim, seeds_of(sim, {chan("a")}), zero);
    CHECK(depths(only_seed) == std::map<std::string, int>{{chan("a"), 0}});
}

TEST_CASE("expand: diamond visits the shared node once") {
    SimulatedPlatform sim;
    add_linking(sim, chan("a"), {chan("b"), chan("c")});
    add_linking(sim, chan("b"), {chan("d")});
    add_linking(sim, chan("c"), {chan("d")});
    add_linking(sim, chan("d"), {});
    const auto d = expand(sim, seeds_of(sim, {chan("a")}));
    CHECK(d.channels.size() == 4);
    CHECK(depths(d)[chan("d")] == 2);
    for (auto n : {"a", "b", "c", "d"}) CHECK(sim.fetch_count(chan(n)) == 1);
}

TEST_CASE("expand: bots, invites and dead links") {
    SimulatedPlatform sim;
    add_linking(sim, chan("a"), {chan("gone"), "films_grab_bot", "+InviteHash1", "nobody_home"});
    add_linking(sim, chan("gone"), {});
    add_linking(sim, "films_grab_bot", {});
    sim.remove_channel(chan("gone"));
    const auto d = expand(sim, seeds_of(sim, {chan("a")}));
    CHECK(d.channels.size() == 1);
    REQUIRE(d.bots.size() == 1);
    CHECK(d.bots[0].record.id == "films_grab_bot");
    CHECK(d.bots[0].depth == 1);
    CHECK(d.dead_links == 2);
    CHECK(sim.fetch_count("films_grab_bot") == 0);
    const auto& links = d.channels[0].links;
    CHECK(std::count_if(links.begin(), links.end(), [](const InternalLink& l) { return l.kind == LinkKind::invite; }) == 1);
}

TEST_CASE("expand: links outside the probe window are not seen") {
    SimulatedPlatform sim;
    add_linking(sim, chan("a"), {chan("b")});
    add_linking(sim, chan("b"), {});
    CrawlOptions opts;
    opts.probe_posts = 1;
    const auto d = expand(sim, seeds_of(sim, {chan("a")}), opts);
    CHECK(d.channels.size() == 2);
    SimulatedPlatform sim2;
    add_linking(sim2, chan("a"), {chan("b"), chan("c")});
    add_linking(sim2, chan("b"), {});
    add_linking(sim2, chan("c"), {});
    const auto d2 = expand(sim2, seeds_of(sim2, {chan("a")}), opts);
    CHECK(depths(d2) == std::map<std::string, int>{{chan("a"), 0}, {chan("c"), 1}});
}

TEST_CASE("expand: matches the brute-force closure and ignores parallelism") {
    Rng rng(8);
    for (int i = 0; i < 15; ++i) {
        EcosystemSpec spec;
        spec.seed = 100 + static_cast<std::uint64_t>(i);
        spec.n_channels = static_cast<std::size_t>(rng.range(10, 80));
        spec.n_bots = static_cast<std::size_t>(rng.range(0, 6));
        spec.role_plan.n_deep = 2;
        spec.role_plan.n_invite_only = 1;
        spec.role_plan.dangling_rate = 0.1;
        spec.role_plan.free_links = i % 2 == 0;
        const auto eco = generate_ecosystem(spec);
        std::vector<ChannelRecord> seeds;
        for (const auto& r : eco.platform->entities()) {
            if (!eco.platform->is_removed(r.id) && recency_gate(r, eco.now)) seeds.push_back(r);
        }
        CrawlOptions serial, parallel;
        parallel.parallelism = 4;
        const auto a = expand(*eco.platform, seeds, serial);
        const auto b = expand(*eco.platform, seeds, parallel);
        CHECK(testing::discovered_ids(a) == testing::closure_oracle(eco, eco.now, 7, 2));
        CHECK(depths(a) == depths(b));
        CHECK(a.dead_links == b.dead_links);
        for (const auto& [id, depth] : depths(a)) CHECK(depth <= 2);
        for (std::size_t k = 1; k < a.channels.size(); ++k) {
            const auto& p = a.channels[k - 1];
            const auto& q = a.channels[k];
            CHECK(std::tie(p.depth, p.record.id) < std::tie(q.depth, q.record.id));
        }
    }
}
