// Acceptance gate: one PASS/FAIL line per criterion.
//
// Exit status is 0 when the set of failing criteria equals the set named with
// --expect-fail (comma separated ids), so a known failure stays visible without
// masking regressions elsewhere. An expected failure that starts passing is an error too.

#include "../support.hpp"

#include "antirip/handle_synthesis.hpp"
#include "antirip/loss.hpp"
#include "antirip/promotion_graph.hpp"
#include "antirip/report.hpp"
#include "antirip/rng.hpp"
#include "antirip/serialize.hpp"
#include "antirip/taxonomy.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <regex>

using namespace antirip;
using namespace antirip::testing;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// ---- 1. handle synthesis -------------------------------------------------------

std::string random_fragment(Rng& rng, std::size_t min_len, std::size_t max_len) {
    static const std::string alpha = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string s;
    const auto n = static_cast<std::size_t>(rng.range(static_cast<std::int64_t>(min_len),
                                                      static_cast<std::int64_t>(max_len)));
    for (std::size_t i = 0; i < n; ++i) s += alpha[rng.below(rng.chance(0.8) ? 26 : alpha.size())];
    return s;
}

std::set<std::string> adjacent_oracle(const std::string& handle) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : handle) {
        if (c == '_') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    std::set<std::string> out;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        out.insert(parts[i] + "_" + parts[i + 1]);
        out.insert(parts[i] + parts[i + 1]);
    }
    return out;
}

Verdict criterion_handle_synthesis() {
    const auto t0 = Clock::now();
    const std::regex pattern("[A-Za-z][A-Za-z0-9_]{4,31}");
    Rng rng(20240101);
    std::size_t bad_pattern = 0, nondeterministic = 0, incomplete = 0, over_bound = 0, emitted = 0;
    constexpr std::size_t kCases = 10000;
    for (std::size_t c = 0; c < kCases; ++c) {
        SeedLexicon lex;
        const auto n_terms = rng.range(1, 6);
        for (std::int64_t i = 0; i < n_terms; ++i) {
            auto t = random_fragment(rng, 1, 9);
            if (rng.chance(0.1)) t += "_";
            lex.terms.insert(t);
        }
        ObservedHandles obs;
        const auto n_handles = rng.range(0, 3);
        for (std::int64_t i = 0; i < n_handles; ++i) {
            std::string h(1, static_cast<char>('a' + rng.below(26)));
            if (rng.chance(0.3)) h[0] = static_cast<char>(std::toupper(h[0]));
            h += random_fragment(rng, 1, 6);
            const auto extra = rng.range(0, 3);
            for (std::int64_t j = 0; j < extra && h.size() < 24; ++j) h += "_" + random_fragment(rng, 1, 6);
            while (h.size() < 5) h += "x";
            obs.handles.insert(h);
        }
        const auto k = static_cast<std::size_t>(rng.range(0, 40));
        const auto seed = rng.next();

        const auto a = generate_candidates(lex, obs, k, seed);
        const auto b = generate_candidates(lex, obs, k, seed);
        if (a.candidates != b.candidates) ++nondeterministic;
        emitted += a.candidates.size();
        if (a.candidates.size() > candidate_bound(lex, obs, k)) ++over_bound;
        std::set<std::string> set(a.candidates.begin(), a.candidates.end());
        for (const auto& cand : a.candidates) {
            if (!std::regex_match(cand, pattern)) ++bad_pattern;
        }
        for (const auto& h : obs.handles) {
            for (const auto& comp : adjacent_oracle(h)) {
                if (std::regex_match(comp, pattern) && !set.count(comp)) ++incomplete;
            }
        }
    }
    const double secs = seconds_since(t0);
    Verdict v;
    v.check(bad_pattern == 0, std::to_string(bad_pattern) + " invalid of " + std::to_string(emitted) + " candidates");
    v.check(nondeterministic == 0, std::to_string(nondeterministic) + " nondeterministic cases");
    v.check(incomplete == 0, std::to_string(incomplete) + " missing adjacent composites");
    v.check(over_bound == 0, std::to_string(over_bound) + " cases over the size bound");
    v.check(secs < 30, fmt(secs, 1) + " s for " + std::to_string(kCases) + " cases");
    return v;
}

// ---- 2. crawler depth bound ----------------------------------------------------

EcosystemSpec random_graph_spec(Rng& rng, std::uint64_t seed) {
    EcosystemSpec spec;
    spec.seed = seed;
    spec.n_channels = static_cast<std::size_t>(rng.range(8, 140));
    spec.n_bots = static_cast<std::size_t>(rng.range(0, 12));
    spec.benign_fraction = rng.unit() * 0.3;
    auto& rp = spec.role_plan;
    rp.n_super = static_cast<std::size_t>(rng.range(0, 2));
    rp.super_outdeg = static_cast<std::size_t>(rng.range(4, 16));
    rp.n_terminal = static_cast<std::size_t>(rng.range(0, 5));
    rp.n_invite_only = static_cast<std::size_t>(rng.range(0, 3));
    rp.n_deep = static_cast<std::size_t>(rng.range(0, 3));
    rp.regular_max_outdeg = static_cast<std::size_t>(rng.range(1, 4));
    rp.dangling_rate = rng.unit() * 0.15;
    rp.bot_link_rate = rng.unit() * 0.3;
    rp.free_links = rng.chance(0.5);
    spec.taxonomy_plan.posts_min = 2;
    spec.taxonomy_plan.posts_max = 8;
    return spec;
}

Verdict criterion_crawler() {
    const auto t0 = Clock::now();
    Rng rng(77);
    std::size_t graphs = 0, mismatches = 0, too_deep = 0, oversized = 0, attempts = 0, max_nodes = 0;
    while (graphs < 100 && attempts < 1000) {
        ++attempts;
        const auto spec = random_graph_spec(rng, 1000 + attempts);
        Ecosystem eco;
        try {
            eco = generate_ecosystem(spec);
        } catch (const InvalidSpec&) {
            continue;
        }
        const auto entities = eco.platform->entities();
        max_nodes = std::max(max_nodes, entities.size());
        if (entities.size() > 200) {
            ++oversized;
            continue;
        }
        ++graphs;
        CandidateSet cands;
        for (const auto& e : entities) {
            if (e.handle) cands.candidates.push_back(*e.handle);
        }
        cands.candidates.push_back("nosuchhandle");
        std::vector<ChannelRecord> seeds;
        for (auto& r : probe(*eco.platform, cands)) {
            if (recency_gate(r, eco.now)) seeds.push_back(r);
        }
        CrawlOptions opts;
        opts.parallelism = 1 + graphs % 3;
        const auto result = expand(*eco.platform, seeds, opts);
        if (discovered_ids(result) != closure_oracle(eco, eco.now, kDefaultWindowDays, 2)) ++mismatches;
        for (const auto* list : {&result.channels, &result.bots}) {
            for (const auto& e : *list) too_deep += e.depth > 2;
        }
    }
    const double secs = seconds_since(t0);
    Verdict v;
    v.check(graphs == 100, std::to_string(graphs) + " graphs (largest " + std::to_string(max_nodes) + " nodes)");
    v.check(mismatches == 0, std::to_string(mismatches) + " closure mismatches");
    v.check(too_deep == 0, std::to_string(too_deep) + " entities beyond depth 2");
    v.check(secs < 60, fmt(secs, 1) + " s");
    return v;
}

// ---- 3. role thresholds --------------------------------------------------------

Verdict criterion_thresholds() {
    constexpr double mu = 5.9554, sigma = 8.2207;
    // Rescale a skewed integer sample to the target population moments.
    std::vector<double> base{0, 0, 1, 1, 1, 2, 2, 3, 3, 4, 5, 6, 8, 12, 20, 35};
    double m = 0, s = 0;
    for (double x : base) m += x;
    m /= static_cast<double>(base.size());
    for (double x : base) s += (x - m) * (x - m);
    s = std::sqrt(s / static_cast<double>(base.size()));
    std::vector<double> sample;
    for (double x : base) sample.push_back(mu + sigma * (x - m) / s);

    const auto th = thresholds_from_degrees(sample);
    Verdict v;
    v.check(std::abs(th.super_cutoff - 22.3968) <= 1e-9, "cutoff " + fmt(th.super_cutoff, 10));

    std::size_t min_flagged = 0;
    for (std::size_t d = 0; d <= 40 && !min_flagged; ++d) {
        PromotionGraph probe_graph;
        probe_graph.add_node("c", NodeKind::channel);
        for (std::size_t i = 0; i < d; ++i) {
            probe_graph.add_node("ext:" + std::to_string(i), NodeKind::channel, true);
            probe_graph.add_edge("c", "ext:" + std::to_string(i));
        }
        if (classify_roles(probe_graph, th).front().role == Role::super) min_flagged = d;
    }
    v.check(min_flagged == 23, "minimum flagged out-degree " + std::to_string(min_flagged));
    return v;
}

// ---- 4. transitive pairs -------------------------------------------------------

std::set<std::pair<std::string, std::string>> closure_pairs_oracle(const std::vector<std::string>& ids,
                                                                   const std::set<std::pair<int, int>>& edges) {
    const auto n = ids.size();
    // reach2[i][j]: a path of length >= 2 from i to j (Warshall over paths of length >= 1, then one more hop).
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n));
    for (auto [a, b] : edges) reach[a][b] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    std::set<std::pair<std::string, std::string>> out;
    for (auto [a, m] : edges) {
        for (std::size_t j = 0; j < n; ++j) {
            if (reach[m][j] && static_cast<int>(j) != a && !edges.count({a, static_cast<int>(j)})) {
                out.emplace(ids[a], ids[j]);
            }
        }
    }
    return out;
}

Verdict criterion_transitive_pairs() {
    Verdict v;
    {
        PromotionGraph chain;
        for (auto id : {"a", "b", "c"}) chain.add_node(id, NodeKind::channel);
        chain.add_edge("a", "b");
        chain.add_edge("b", "c");
        const std::set<std::pair<std::string, std::string>> want{{"a", "c"}};
        v.check(transitive_pairs(chain) == want, "chain a->b->c gives {(a,c)}");
        chain.add_edge("a", "c");
        v.check(transitive_pairs(chain).empty(), "triangle gives {}");
    }
    Rng rng(4242);
    std::size_t mismatches = 0;
    for (int g = 0; g < 100; ++g) {
        const auto n = static_cast<int>(rng.range(1, 50));
        const double p = rng.unit() * 0.15;
        std::vector<std::string> ids;
        PromotionGraph graph;
        for (int i = 0; i < n; ++i) {
            ids.push_back("n" + std::to_string(i));
            graph.add_node(ids.back(), NodeKind::channel);
        }
        std::set<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && rng.chance(p)) {
                    edges.emplace(i, j);
                    graph.add_edge(ids[i], ids[j]);
                }
        if (transitive_pairs(graph) != closure_pairs_oracle(ids, edges)) ++mismatches;
    }
    v.check(mismatches == 0, std::to_string(mismatches) + " of 100 random graphs differ");
    return v;
}

// ---- 5. loss estimator ---------------------------------------------------------

struct LossCase {
    std::vector<ViewedTitle> items;
    PricingTable pricing;
    ExchangeTable fx;
};

const std::vector<std::string> kServices{"Streamly", "Cinevault", "Reelbox", "Kinora"};
const std::vector<std::string> kRegions{"US", "IN", "TR"};

LossCase random_loss_case(Rng& rng, std::size_t max_posts) {
    LossCase c;
    c.fx.rates = {{"USD", 1.0}, {"EUR", 1.08}, {"INR", 0.012}, {"TRY", 0.031}};
    const std::vector<std::string> currencies{"USD", "EUR", "INR", "TRY"};
    const auto n_titles = static_cast<std::size_t>(rng.range(1, 8));
    // Distinct prices per service so cheapest-service choices never tie.
    std::map<std::string, double> base_price;
    for (std::size_t s = 0; s < kServices.size(); ++s) base_price[kServices[s]] = 3.0 + 2.0 * static_cast<double>(s) + rng.unit();
    for (std::size_t t = 0; t < n_titles; ++t) {
        const auto id = "t" + std::to_string(t);
        for (const auto& region : kRegions) {
            PricingEntry e;
            e.title_id = id;
            e.region = region;
            const auto mode = rng.below(3);
            if (mode == 0) {
                const auto k = rng.range(1, 3);
                std::set<std::string> used;
                for (std::int64_t i = 0; i < k; ++i) {
                    const auto& svc = rng.pick(kServices);
                    if (!used.insert(svc).second) continue;
                    const auto& cur = rng.pick(currencies);
                    e.streaming.push_back({svc, base_price[svc] / c.fx.rates[cur], cur});
                }
            } else if (mode == 1) {
                const auto& cur = rng.pick(currencies);
                e.rental = Price{(1.0 + 5.0 * rng.unit()) / c.fx.rates[cur], cur};
            } else {
                e.physical.push_back({9.0 + 10.0 * rng.unit(), "USD"});
                e.physical.push_back({5.0 + 10.0 * rng.unit(), "EUR"});
            }
            c.pricing.add(e);
        }
    }
    const auto n_posts = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(max_posts)));
    for (std::size_t i = 0; i < n_posts; ++i) {
        ViewedTitle v;
        v.title_id = "t" + std::to_string(rng.below(n_titles));
        v.post = {"c" + std::to_string(rng.below(4)), static_cast<std::int64_t>(i + 1)};
        v.views = rng.below(600);
        v.region = rng.pick(kRegions);
        c.items.push_back(v);
    }
    return c;
}

/// Same case with every price restated in a synthetic currency.
LossCase restate(const LossCase& c, double rate) {
    LossCase out;
    out.items = c.items;
    out.fx = c.fx;
    out.fx.rates["XCU"] = rate;
    auto conv = [&](double cost, const std::string& cur) { return cost * c.fx.rates.at(cur) / rate; };
    for (const auto& [key, e] : c.pricing.entries()) {
        PricingEntry r = e;
        for (auto& s : r.streaming) s = {s.service, conv(s.monthly_cost, s.currency), "XCU"};
        if (r.rental) r.rental = Price{conv(r.rental->cost, r.rental->currency), "XCU"};
        for (auto& p : r.physical) p = {conv(p.cost, p.currency), "XCU"};
        out.pricing.add(r);
    }
    return out;
}

/// Per-unit oracle: walks every view of every post and books one consumption per complete hundred
/// in the bucket the pricing rules assign the view to.
double unit_oracle_total(const LossCase& c) {
    struct Bucket {
        std::uint64_t views = 0;
        std::uint64_t consumptions = 0;
        double unit = 0;
    };
    std::map<std::string, Bucket> buckets;
    for (const auto& it : c.items) {
        const PricingEntry* e = c.pricing.find(it.title_id, it.region);
        if (!e) continue;
        std::string key;
        double unit = 0;
        if (!e->streaming.empty()) {
            const StreamingOffer* best = nullptr;
            for (const auto& s : e->streaming) {
                if (!best || c.fx.to_usd(s.monthly_cost, s.currency) < c.fx.to_usd(best->monthly_cost, best->currency)) best = &s;
            }
            key = "S|" + best->service + "|" + it.region;
            unit = std::numeric_limits<double>::infinity();
            for (const auto& [k, other] : c.pricing.entries()) {
                if (other.region != it.region && other.region != "*") continue;
                for (const auto& s : other.streaming) {
                    if (s.service == best->service) unit = std::min(unit, c.fx.to_usd(s.monthly_cost, s.currency));
                }
            }
        } else if (e->rental) {
            key = "T|" + it.title_id + "|" + it.region;
            unit = c.fx.to_usd(e->rental->cost, e->rental->currency);
        } else {
            key = "T|" + it.title_id + "|" + it.region;
            unit = std::numeric_limits<double>::infinity();
            for (const auto& p : e->physical) unit = std::min(unit, c.fx.to_usd(p.cost, p.currency));
        }
        auto& b = buckets[key];
        b.unit = unit;
        for (std::uint64_t view = 0; view < it.views; ++view) {
            if (++b.views % 100 == 0) ++b.consumptions;
        }
    }
    double total = 0;
    for (const auto& [k, b] : buckets) total += static_cast<double>(b.consumptions) * b.unit;
    return total;
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Verdict criterion_loss() {
    Verdict v;
    {
        PricingTable pricing;
        PricingEntry e;
        e.title_id = "x";
        e.region = "*";
        e.rental = Price{3.99, "USD"};
        pricing.add(e);
        const auto est = estimate({{"x", {"c", 1}, 100, "US"}}, pricing, ExchangeTable{});
        const bool ok = est.groups.size() == 1 && est.groups[0].consumptions == 1 && close_rel(est.total_usd, 3.99, 1e-12);
        v.check(ok, "100 views -> " + (est.groups.empty() ? std::string("no group") : std::to_string(est.groups[0].consumptions)) +
                        " consumption, " + fmt(est.total_usd, 2) + " USD");
    }
    Rng rng(5150);
    std::size_t grouped_over = 0, currency_off = 0, oracle_off = 0;
    double worst_excess = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto c = random_loss_case(rng, 20);
        const auto grouped = estimate(c.items, c.pricing, c.fx);
        // Each title on its own, at the same per-group unit cost.
        double individual = 0;
        for (const auto& g : grouped.groups) {
            for (const auto& [title, views] : g.views_by_title) {
                individual += static_cast<double>(consumptions_for(views)) * g.unit_cost_usd;
            }
        }
        if (grouped.total_usd > individual + 1e-9) {
            ++grouped_over;
            worst_excess = std::max(worst_excess, grouped.total_usd - individual);
        }
        const double rate = 0.001 + rng.unit() * 5;
        if (!close_rel(estimate(c.items, restate(c, rate).pricing, restate(c, rate).fx).total_usd, grouped.total_usd, 1e-6)) {
            ++currency_off;
        }
        if (!close_rel(unit_oracle_total(c), grouped.total_usd, 1e-9)) ++oracle_off;
    }
    v.check(grouped_over == 0, "grouped > individual in " + std::to_string(grouped_over) +
                                   " of 1000 cases (worst excess " + fmt(worst_excess, 2) + " USD)");
    v.check(currency_off == 0, std::to_string(currency_off) + " currency-invariance violations");
    v.check(oracle_off == 0, std::to_string(oracle_off) + " disagreements with the 100-view oracle");
    return v;
}

// ---- 6. classifier -------------------------------------------------------------

Verdict criterion_classifier() {
    const auto& cat = fixture_catalog();
    RuleClassifier rules(RuleBook::load(data_dir()),
                         [&cat](const PostRecord& p) { return !match(p, cat).empty(); });
    Verdict v;
    bool monotone = true;
    ClassificationMetrics first;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto corpus = generate_post_corpus(seed, 1000, 0.5, cat.entries());
        std::vector<PostVerdict> got, want;
        for (const auto& g : corpus) {
            PostContext ctx;
            got.push_back(classify_post(rules, g.post, ctx));
            want.push_back(g.truth.as_verdict());
        }
        const auto m = evaluate(got, want);
        if (seed == 1) first = m;
        monotone = monotone && m.primary_accuracy >= m.primary_s1_accuracy &&
                   m.primary_s1_accuracy >= m.primary_s1_s2_accuracy;
    }
    v.check(first.accuracy >= 0.95, "detection accuracy " + fmt(first.accuracy));
    v.check(first.primary_accuracy >= 0.90, "primary-label accuracy " + fmt(first.primary_accuracy));
    v.check(monotone, "P >= P+S1 >= P+S1+S2 on 5 runs (first: " + fmt(first.primary_accuracy) + " / " +
                          fmt(first.primary_s1_accuracy) + " / " + fmt(first.primary_s1_s2_accuracy) + ")");
    return v;
}

// ---- 7. catalog matcher --------------------------------------------------------

Verdict criterion_catalog() {
    const auto& cat = fixture_catalog();
    const std::vector<std::string> templates{
        "{} full movie download link below", "Watch {} online free 1080p", "New upload: {} HDRip x264",
        "{}", "Grab {} here, all parts in one zip", "Just finished {} and it was great"};
    std::size_t posts = 0, recalled = 0, returned = 0, correct = 0;
    for (std::size_t i = 0; i < cat.entries().size(); ++i) {
        const auto& e = cat.entries()[i];
        const auto& tpl = templates[i % templates.size()];
        PostRecord p;
        p.channel_id = "corpus";
        p.post_id = static_cast<std::int64_t>(i + 1);
        p.text = tpl.substr(0, tpl.find("{}")) + e.title + tpl.substr(tpl.find("{}") + 2);
        const auto ms = match(p, cat);
        ++posts;
        bool hit = false;
        for (const auto& m : ms) {
            ++returned;
            if (m.entry_id == e.id) {
                hit = true;
                ++correct;
            }
        }
        recalled += hit;
    }
    const double recall = static_cast<double>(recalled) / static_cast<double>(posts);
    const double precision = returned ? static_cast<double>(correct) / static_cast<double>(returned) : 0.0;
    Verdict v;
    v.check(recall == 1.0, "recall " + fmt(recall) + " over " + std::to_string(posts) + " titles");
    v.check(precision >= 0.99, "precision " + fmt(precision));

    auto office = [&](const std::string& text) {
        PostRecord p;
        p.channel_id = "f";
        p.post_id = 1;
        p.text = text;
        return match(p, cat);
    };
    const auto us = office("The Office US S03 720p");
    v.check(us.size() == 1 && us[0].entry_id == "office-us" && !us[0].ambiguous, "\"The Office US S03 720p\" -> office-us");
    const auto both = office("The Office complete");
    v.check(both.size() == 2 && both[0].ambiguous && both[1].ambiguous, "\"The Office complete\" -> both, ambiguous");
    return v;
}

// ---- 8. end to end, 9. determinism ---------------------------------------------

struct E2ERun {
    Ecosystem eco;
    std::filesystem::path run_dir;
    RunSummary summary;
};

E2ERun run_e2e(const std::filesystem::path& root) {
    E2ERun r;
    r.eco = generate_ecosystem(e2e_spec());
    const auto platform_dir = root / "platform";
    save_ecosystem(r.eco, platform_dir);
    r.run_dir = root / "run";
    RunContext ctx(fixture_config(platform_dir, r.run_dir, r.eco.now), r.eco.platform.get());
    r.summary = run_pipeline(ctx);
    return r;
}

std::set<std::string> role_ids(const std::filesystem::path& roles_csv, const std::string& role) {
    std::set<std::string> out;
    for (const auto& line : read_lines(roles_csv)) {
        const auto cells = text::split(line, ',');
        if (cells.size() >= 3 && cells[2] == role) out.insert(cells[0]);
    }
    return out;
}

Verdict criterion_end_to_end() {
    const auto t0 = Clock::now();
    const auto root = scratch("acceptance_e2e");
    auto r = run_e2e(root);
    Verdict v;

    const auto d = discovery_from_rows(read_jsonl(r.run_dir / artifact::discovery));
    const auto want = closure_oracle(r.eco, r.eco.now, kDefaultWindowDays, 2);
    v.check(discovered_ids(d) == want, "discovered " + std::to_string(discovered_ids(d).size()) + " of " +
                                           std::to_string(want.size()) + " closure entities");

    std::set<std::string> planted_super, planted_terminal;
    for (const auto& e : r.eco.truth.entities) {
        if (e.planted_role == "super") planted_super.insert(e.id);
        if (e.planted_role == "terminal") planted_terminal.insert(e.id);
    }
    const auto roles = r.run_dir / artifact::graph_dir / "roles.csv";
    const auto supers = role_ids(roles, "super"), terminals = role_ids(roles, "terminal");
    v.check(supers == planted_super && supers.size() == 1, std::to_string(supers.size()) + " super flagged");
    v.check(terminals == planted_terminal && terminals.size() == 4,
            std::to_string(terminals.size()) + " terminals flagged");

    std::set<std::string> rights_holders;
    bool platform_stream = false;
    std::vector<std::string> reported;
    for (const auto& j : read_jsonl(r.run_dir / artifact::reports)) {
        const auto rep = report_from_json(j);
        if (rep.recipient.kind == "platform") {
            platform_stream = true;
            for (const auto& c : rep.channels) reported.push_back(c.channel.id);
        } else {
            rights_holders.insert(rep.recipient.name);
        }
    }
    v.check(platform_stream && rights_holders.size() == 2,
            std::to_string(rights_holders.size()) + " rights-holder streams + " + (platform_stream ? "1" : "0") +
                " platform stream");

    script_takedowns(*r.eco.platform, reported, 0.4, 11);
    PipelineConfig cfg = fixture_config(root / "platform", r.run_dir, r.eco.now + kSecondsPerDay);
    RunContext later(cfg, r.eco.platform.get());
    stage_track(later, r.run_dir / artifact::reports, r.run_dir / artifact::tracking, r.run_dir / artifact::outcome);
    const auto outcome = outcome_summary(load_tracking(r.run_dir / artifact::tracking));
    const double rate = outcome.overall.removal_rate.value_or(-1);
    v.check(rate == 0.4, "removal rate " + fmt(rate) + " over " + std::to_string(outcome.overall.reported) + " reported");
    const double secs = seconds_since(t0);
    v.check(secs < 300, fmt(secs, 1) + " s");
    std::filesystem::remove_all(root);
    return v;
}

Verdict criterion_determinism() {
    const auto a = scratch("acceptance_det_a"), b = scratch("acceptance_det_b");
    const auto ra = run_e2e(a), rb = run_e2e(b);
    const auto ta = tree_bytes(ra.run_dir), tb = tree_bytes(rb.run_dir);
    std::size_t differing = 0;
    for (const auto& [path, bytes] : ta) {
        auto it = tb.find(path);
        differing += it == tb.end() || it->second != bytes;
    }
    differing += tb.size() > ta.size() ? tb.size() - ta.size() : 0;
    Verdict v;
    v.check(!ta.empty() && differing == 0,
            std::to_string(ta.size()) + " artifacts, " + std::to_string(differing) + " differ");
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    return v;
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::string> expected_fail;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--expect-fail=", 0) == 0) {
            for (const auto& id : text::split(arg.substr(14), ',')) expected_fail.insert(text::trim(id));
        }
    }

    const std::vector<std::tuple<std::string, std::string, std::function<Verdict()>>> criteria{
        {"1", "handle synthesis", criterion_handle_synthesis},
        {"2", "crawler depth bound", criterion_crawler},
        {"3", "role thresholds", criterion_thresholds},
        {"4", "transitive pairs", criterion_transitive_pairs},
        {"5", "loss estimator", criterion_loss},
        {"6", "classifier", criterion_classifier},
        {"7", "catalog matcher", criterion_catalog},
        {"8", "end to end", criterion_end_to_end},
        {"9", "determinism", criterion_determinism},
    };

    std::set<std::string> failed;
    for (const auto& [id, name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        if (!v.pass) failed.insert(id);
        std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << v.detail
                  << (v.pass || !expected_fail.count(id) ? "" : "  (expected failure)") << std::endl;
    }
    std::cout << (criteria.size() - failed.size()) << "/" << criteria.size() << " criteria passed\n";
    if (failed != expected_fail) {
        for (const auto& id : expected_fail) {
            if (!failed.count(id)) std::cout << "criterion " << id << " was expected to fail but passed\n";
        }
        return 1;
    }
    return 0;
}
