#include "antirip/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "antirip/adapters.hpp"
#include "antirip/crawler.hpp"
#include "antirip/errors.hpp"
#include "antirip/handle_synthesis.hpp"
#include "antirip/hash.hpp"
#include "antirip/loss.hpp"
#include "antirip/promotion_graph.hpp"
#include "antirip/serialize.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace fs = std::filesystem;

RunContext::RunContext(PipelineConfig config, PlatformClient* platform, std::ostream* log)
    : config_(std::move(config)),
      run_id_(config_.effective_run_id()),
      config_hash_(config_.hash()),
      now_(config_.clock()),
      raw_platform_(platform),
      log_(log) {}

PlatformClient& RunContext::platform() {
    if (!raw_platform_) throw InvalidConfig("this stage needs a platform (set platform_dir)");
    if (!retrying_) {
        BackoffPolicy policy;
        policy.base = std::chrono::milliseconds(config_.backoff_base_ms);
        policy.max_retries = config_.max_retries;
        retrying_ = std::make_unique<RetryingClient>(*raw_platform_, policy, real_sleeper());
    }
    return *retrying_;
}

Json RunContext::header(const std::string& stage) const {
    return Json{{"run_id", run_id_}, {"stage", stage}, {"config_hash", config_hash_}};
}

bool RunContext::write(const fs::path& path, const std::string& content) {
    touched_.push_back(path);
    if (fs::is_regular_file(path) && read_text_file(path) == content) return false;
    write_text_file(path, content);
    ++written_;
    return true;
}

std::vector<fs::path> RunContext::take_touched() { return std::exchange(touched_, {}); }

const Catalog& RunContext::catalog() {
    if (!catalog_) {
        Stoplist stop;
        if (!config_.stoplist.empty()) stop = Stoplist::load(config_.stoplist);
        if (config_.catalog.empty()) throw InvalidConfig("catalog is not set");
        catalog_ = ingest_catalog(config_.catalog, stop);
    }
    return *catalog_;
}

std::unique_ptr<ClassifierAdapter> RunContext::make_classifier() {
    RuleBook rules = RuleBook::load(config_.rules_dir);
    if (!config_.group_priority.empty()) rules.priority = parse_group_priority(config_.group_priority);
    const Catalog* cat = &catalog();
    MatchOptions mo;
    mo.threshold = config_.match_threshold;
    TitleProbe probe = [cat, mo](const PostRecord& p) { return !match(p, *cat, mo).empty(); };
    auto rule = std::make_unique<RuleClassifier>(std::move(rules), probe);

    const auto& spec = config_.classifier;
    if (spec == "rules") return rule;
    if (spec.rfind("subprocess:", 0) == 0) {
        std::vector<std::string> argv;
        std::istringstream in(spec.substr(11));
        for (std::string w; in >> w;) argv.push_back(w);
        std::unique_ptr<ClassifierAdapter> primary;
        try {
            primary = std::make_unique<SubprocessClassifier>(argv);
        } catch (const TransportFailure& e) {
            log(std::string("classifier: ") + e.what() + "; using the rule engine");
            return rule;
        }
        return std::make_unique<FallbackClassifier>(std::move(primary), std::move(rule));
    }
    if (spec.rfind("http://", 0) == 0) {
        return std::make_unique<FallbackClassifier>(std::make_unique<HttpClassifier>(spec), std::move(rule));
    }
    throw InvalidConfig("classifier must be rules, subprocess:<command> or an http:// URL");
}

void RunContext::log(const std::string& line) {
    if (log_) *log_ << line << '\n';
}

namespace {

std::vector<PostRecord> load_posts(const fs::path& p) {
    std::vector<PostRecord> out;
    for (const auto& j : read_jsonl(p)) out.push_back(j.get<PostRecord>());
    return out;
}

std::vector<PostVerdict> load_verdicts(const fs::path& p) {
    std::vector<PostVerdict> out;
    for (const auto& j : read_jsonl(p)) out.push_back(j.get<PostVerdict>());
    return out;
}

std::map<PostKey, std::vector<TitleMatch>> load_matches(const fs::path& p) {
    std::map<PostKey, std::vector<TitleMatch>> out;
    for (const auto& j : read_jsonl(p)) {
        auto m = j.get<TitleMatch>();
        out[m.post].push_back(std::move(m));
    }
    return out;
}

void require(const fs::path& p) {
    if (!fs::exists(p)) throw MissingInput("missing input " + p.string());
}

} // namespace

void stage_synth(RunContext& ctx, const fs::path& out) {
    const auto& c = ctx.config();
    const auto lexicon = load_lexicon(c.lexicon);
    ObservedHandles observed;
    if (!c.observed_handles.empty()) observed = load_observed_handles(c.observed_handles);
    const auto set = generate_candidates(lexicon, observed, c.higher_order, c.seed);
    std::string body = "# " + ctx.header("synth").dump() + "\n";
    for (const auto& h : set.candidates) body += h + "\n";
    ctx.write(out, body);
    ctx.log("synth: " + std::to_string(set.candidates.size()) + " candidates");
}

void stage_discover(RunContext& ctx, const fs::path& candidates, const fs::path& out) {
    require(candidates);
    const auto& c = ctx.config();
    CandidateSet set;
    set.seed = c.seed;
    set.candidates = read_lines(candidates);
    ProbeStats ps;
    auto& client = ctx.platform();
    auto resolved = probe(client, set, &ps);
    std::vector<ChannelRecord> seeds;
    std::size_t gated_out = 0;
    for (auto& r : resolved) {
        if (recency_gate(r, ctx.now(), c.window_days)) {
            seeds.push_back(std::move(r));
        } else {
            ++gated_out;
        }
    }
    CrawlOptions opts;
    opts.probe_posts = c.probe_posts;
    opts.max_depth = c.max_depth;
    opts.parallelism = c.parallelism;
    opts.links.parse_mentions = c.parse_mentions;
    const auto result = expand(client, seeds, opts);
    auto rows = discovery_rows(result);
    auto& summary = rows.back();
    summary["probed"] = ps.probed;
    summary["rejected"] = ps.rejected;
    summary["unresolved"] = ps.unresolved;
    summary["resolved"] = resolved.size();
    summary["gated_out"] = gated_out;
    ctx.write(out, jsonl_text(rows, ctx.header("discover")));
    ctx.log("discover: " + std::to_string(seeds.size()) + " seeds, " + std::to_string(result.channels.size()) +
            " channels, " + std::to_string(result.bots.size()) + " bots, " + std::to_string(result.dead_links) +
            " dead links");
}

void stage_hydrate(RunContext& ctx, const fs::path& discovery, const fs::path& out) {
    require(discovery);
    const auto d = discovery_from_rows(read_jsonl(discovery));
    auto& client = ctx.platform();
    std::vector<PostRecord> posts;
    for (const auto& e : d.channels) {
        try {
            auto batch = fetch_posts(client, e.record.id, ctx.config().hydrate_posts);
            posts.insert(posts.end(), batch.begin(), batch.end());
        } catch (const ChannelGone&) {
            ctx.log("hydrate: " + e.record.id + " is gone");
        }
    }
    std::sort(posts.begin(), posts.end(), [](const PostRecord& a, const PostRecord& b) { return key_of(a) < key_of(b); });
    std::vector<Json> rows(posts.begin(), posts.end());
    ctx.write(out, jsonl_text(rows, ctx.header("hydrate")));
    ctx.log("hydrate: " + std::to_string(posts.size()) + " posts");
}

void stage_classify(RunContext& ctx, const fs::path& posts_path, const fs::path& out) {
    require(posts_path);
    const auto posts = load_posts(posts_path);
    if (fs::exists(out)) {
        std::set<PostKey> have, want;
        for (const auto& v : load_verdicts(out)) have.insert(v.post);
        for (const auto& p : posts) want.insert(key_of(p));
        if (have == want) {
            ctx.write(out, read_text_file(out));
            ctx.log("classify: verdicts already complete");
            return;
        }
    }
    auto adapter = ctx.make_classifier();
    std::vector<Json> rows;
    std::size_t piracy = 0, unlabeled = 0;
    for (const auto& p : posts) {
        bool missing_label = false;
        auto v = classify_post(*adapter, p, PostContext{}, &missing_label);
        piracy += v.is_piracy;
        unlabeled += missing_label;
        rows.push_back(v);
    }
    if (auto* fb = dynamic_cast<FallbackClassifier*>(adapter.get()); fb && fb->fallbacks()) {
        ctx.log("classify: " + std::to_string(fb->fallbacks()) + " calls fell back to the rule engine (" +
                fb->last_error() + ")");
    }
    ctx.write(out, jsonl_text(rows, ctx.header("classify")));
    ctx.log("classify: " + std::to_string(piracy) + " of " + std::to_string(posts.size()) + " posts flagged, " +
            std::to_string(unlabeled) + " without a label");
}

void stage_match(RunContext& ctx, const fs::path& posts_path, const fs::path& verdicts_path, const fs::path& out) {
    require(posts_path);
    require(verdicts_path);
    std::set<PostKey> piracy;
    for (const auto& v : load_verdicts(verdicts_path)) {
        if (v.is_piracy) piracy.insert(v.post);
    }
    const auto& cat = ctx.catalog();
    MatchOptions mo;
    mo.threshold = ctx.config().match_threshold;
    std::vector<Json> rows;
    for (const auto& p : load_posts(posts_path)) {
        if (!piracy.count(key_of(p))) continue;
        for (const auto& m : match(p, cat, mo)) rows.push_back(m);
    }
    ctx.write(out, jsonl_text(rows, ctx.header("match")));
    ctx.log("match: " + std::to_string(rows.size()) + " title matches");
}

void stage_graph(RunContext& ctx, const fs::path& discovery, const fs::path& out_dir) {
    require(discovery);
    const auto d = discovery_from_rows(read_jsonl(discovery));
    const auto g = build_graph(d);
    const std::string header = ctx.header("graph").dump();
    std::optional<RoleThresholds> t;
    std::vector<NodeRole> roles;
    try {
        t = compute_thresholds(g);
        roles = classify_roles(g, *t);
    } catch (const EmptyGraph&) {
        ctx.log("graph: no channel nodes");
    }
    ctx.write(out_dir / "edges.csv", edges_csv(g, header));
    ctx.write(out_dir / "roles.csv", roles_csv(g, roles, header));
    ctx.write(out_dir / "graph.dot", to_dot(g, roles, header));

    std::map<std::string, std::size_t> kinds, role_counts;
    for (const auto& e : g.edges()) ++kinds[to_string(e.kind)];
    for (const auto& r : roles) ++role_counts[to_string(r.role)];
    std::size_t channels = 0, bots = 0, external = 0;
    for (const auto& [id, n] : g.nodes()) {
        if (n.external) ++external;
        (n.kind == NodeKind::bot ? bots : channels) += 1;
    }
    const auto comps = components(g);
    std::size_t in_multi = 0, channel_total = 0;
    for (const auto& c : comps) {
        for (const auto& id : c) {
            if (g.nodes().at(id).kind != NodeKind::channel) continue;
            ++channel_total;
            if (c.size() >= 2) ++in_multi;
        }
    }
    Json pairs = Json::array();
    for (const auto& [a, b] : transitive_pairs(g)) pairs.push_back(Json::array({a, b}));
    Json thresholds;
    if (t) {
        thresholds = Json{{"mean_outdeg", t->mean_outdeg},
                          {"median_outdeg", t->median_outdeg},
                          {"stddev_outdeg", t->stddev_outdeg},
                          {"super_cutoff", t->super_cutoff},
                          {"sample_size", t->sample_size}};
    }
    Json summary{{"_header", ctx.header("graph")},
                 {"nodes", g.nodes().size()},
                 {"channels", channels},
                 {"bots", bots},
                 {"external", external},
                 {"edges", g.edge_count()},
                 {"edge_kinds", kinds},
                 {"invite_only_excluded", g.invite_only_excluded()},
                 {"thresholds", thresholds},
                 {"roles", role_counts},
                 {"components", comps},
                 {"channels_in_multi_node_components", in_multi},
                 {"channel_nodes", channel_total},
                 {"transitive_pairs", pairs}};
    ctx.write(out_dir / "graph.json", summary.dump(2) + "\n");
    ctx.log("graph: " + std::to_string(g.nodes().size()) + " nodes, " + std::to_string(g.edge_count()) + " edges");
}

void stage_estimate(RunContext& ctx, const fs::path& posts_path, const fs::path& verdicts_path,
                    const fs::path& matches_path, const fs::path& out) {
    require(posts_path);
    require(verdicts_path);
    require(matches_path);
    const auto& c = ctx.config();
    const auto pricing = load_pricing(c.pricing);
    const auto fx = ExchangeTable::load(c.fx);
    const auto languages = LanguageMap::load(c.language_map);
    const auto items = viewed_titles(load_posts(posts_path), load_verdicts(verdicts_path), load_matches(matches_path), languages);
    const auto est = estimate(items, pricing, fx);
    Json doc = loss_report_json(est, rollup(est, ctx.catalog()));
    doc["_header"] = ctx.header("estimate");
    doc["fx_as_of"] = fx.as_of;
    ctx.write(out, doc.dump(2) + "\n");
    std::ostringstream os;
    os << "estimate: " << est.groups.size() << " priced groups, " << est.unpriced.size() << " unpriced, total "
       << est.total_usd << " USD";
    ctx.log(os.str());
}

void stage_report(RunContext& ctx, const fs::path& discovery, const fs::path& posts_path, const fs::path& verdicts_path,
                  const fs::path& matches_path, const fs::path& outbox, const fs::path& index_out) {
    for (const auto& p : {discovery, posts_path, verdicts_path, matches_path}) require(p);
    const auto& c = ctx.config();
    ReportInputs in;
    const auto d = discovery_from_rows(read_jsonl(discovery));
    for (const auto& e : d.channels) in.channels.push_back(e.record);
    in.posts = load_posts(posts_path);
    in.verdicts = load_verdicts(verdicts_path);
    in.matches = load_matches(matches_path);
    in.catalog = &ctx.catalog();
    if (!c.rights_holders.empty()) in.rights_holders = RightsHolderMap::load(c.rights_holders);
    ReportOptions opts;
    opts.mode = report_mode_from_string(c.report_mode);
    opts.url_only = c.url_only;
    opts.now = ctx.now();
    const auto built = build_reports(in, opts);

    const Json header = ctx.header("report");
    std::vector<Json> index;
    for (const auto& r : built.reports) {
        Json doc = report_json(r);
        index.push_back(doc);
        doc["_header"] = header;
        const auto dir = outbox / r.recipient.slug();
        ctx.write(dir / (r.report_id + ".json"), doc.dump(2) + "\n");
        ctx.write(dir / (r.report_id + ".txt"), "# " + header.dump() + "\n" + render_text(r));
    }
    ctx.write(index_out, jsonl_text(index, header));
    for (const auto& company : built.unmapped_companies) ctx.log("report: no contact for " + company);
    ctx.log("report: " + std::to_string(built.reports.size()) + " reports");
}

namespace {

Json record_row(const TrackingRecord& r) {
    Json j = tracking_json(r);
    j.erase("checks");
    j["type"] = "record";
    return j;
}

Json check_row(const std::string& id, const TrackingCheck& c) {
    Json j{{"type", "check"}, {"entity_id", id}, {"time", c.time}, {"status", to_string(c.status)},
           {"post_removed", c.post_removed}};
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

} // namespace

std::vector<TrackingRecord> load_tracking(const fs::path& path) {
    std::vector<TrackingRecord> records;
    std::map<std::string, std::size_t> at;
    for (const auto& j : read_jsonl(path)) {
        const auto type = j.value("type", std::string());
        if (type == "record") {
            at[j.at("entity_id").get<std::string>()] = records.size();
            records.push_back(tracking_from_json(j));
        } else if (type == "check") {
            auto it = at.find(j.at("entity_id").get<std::string>());
            if (it == at.end()) throw InvalidSpec("check for an untracked entity");
            records[it->second].checks.push_back({j.at("time").get<Timestamp>(),
                                                  check_status_from_string(j.at("status").get<std::string>()),
                                                  j.value("post_removed", std::size_t{0}), j.value("note", std::string())});
        }
    }
    return records;
}

void stage_track(RunContext& ctx, const fs::path& reports, const fs::path& tracking, const fs::path& outcome,
                 bool restart) {
    const auto& c = ctx.config();
    std::vector<TrackingRecord> records;
    std::string existing;
    if (!restart && fs::exists(tracking)) {
        records = load_tracking(tracking);
        existing = read_text_file(tracking);
    } else {
        require(reports);
        std::vector<AbuseReport> rs;
        for (const auto& j : read_jsonl(reports)) rs.push_back(report_from_json(j));
        records = tracking_records(rs);
        std::vector<Json> rows;
        for (auto& r : records) {
            r.window_days = c.tracking_window_days;
            rows.push_back(record_row(r));
        }
        existing = jsonl_text(rows, ctx.header("track"));
    }
    std::vector<std::size_t> before;
    for (const auto& r : records) before.push_back(r.checks.size());
    const auto stats = track(ctx.platform(), records, ctx.now(), c.hydrate_posts);
    std::string appended;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t k = before[i]; k < records[i].checks.size(); ++k) {
            appended += check_row(records[i].entity_id, records[i].checks[k]).dump() + "\n";
        }
    }
    ctx.write(tracking, existing + appended);
    Json doc = outcome_json(outcome_summary(records));
    doc["_header"] = ctx.header("track");
    doc["as_of"] = ctx.now();
    ctx.write(outcome, doc.dump(2) + "\n");
    ctx.log("track: " + std::to_string(stats.checked) + " checked, " + std::to_string(stats.outside_window) +
            " outside the window, " + std::to_string(stats.skipped) + " skipped");
}

RunSummary run_pipeline(RunContext& ctx) {
    const auto& c = ctx.config();
    c.validate();
    const fs::path dir = c.run_dir;
    auto at = [&](const char* name) { return dir / name; };

    struct Stage {
        std::string name;
        std::function<void()> run;
    };
    const std::vector<Stage> stages{
        {"synth", [&] { stage_synth(ctx, at(artifact::candidates)); }},
        {"discover", [&] { stage_discover(ctx, at(artifact::candidates), at(artifact::discovery)); }},
        {"hydrate", [&] { stage_hydrate(ctx, at(artifact::discovery), at(artifact::posts)); }},
        {"classify", [&] { stage_classify(ctx, at(artifact::posts), at(artifact::verdicts)); }},
        {"match", [&] { stage_match(ctx, at(artifact::posts), at(artifact::verdicts), at(artifact::matches)); }},
        {"graph", [&] { stage_graph(ctx, at(artifact::discovery), at(artifact::graph_dir)); }},
        {"estimate",
         [&] { stage_estimate(ctx, at(artifact::posts), at(artifact::verdicts), at(artifact::matches), at(artifact::loss)); }},
        {"report",
         [&] {
             stage_report(ctx, at(artifact::discovery), at(artifact::posts), at(artifact::verdicts),
                          at(artifact::matches), at(artifact::outbox), at(artifact::reports));
         }},
        {"track", [&] { stage_track(ctx, at(artifact::reports), at(artifact::tracking), at(artifact::outcome), true); }},
    };

    Json state{{"run_id", ctx.run_id()}, {"config_hash", ctx.config_hash()}, {"stages", Json::object()}};
    const auto state_path = at(artifact::state);
    if (fs::exists(state_path)) {
        Json old = Json::parse(read_text_file(state_path));
        if (old.value("config_hash", std::string()) == ctx.config_hash() && old.contains("stages")) {
            state["stages"] = old["stages"];
        }
    }
    auto intact = [&](const Json& outputs) {
        for (const auto& [rel, hash] : outputs.items()) {
            const auto p = dir / rel;
            if (!fs::is_regular_file(p) || hex64(fnv1a64(read_text_file(p))) != hash.get<std::string>()) return false;
        }
        return true;
    };

    RunSummary summary;
    summary.run_id = ctx.run_id();
    bool upstream_changed = false;
    for (const auto& s : stages) {
        if (!upstream_changed && state["stages"].contains(s.name) && intact(state["stages"][s.name])) {
            summary.stages_skipped.push_back(s.name);
            continue;
        }
        ctx.take_touched();
        const auto before = ctx.artifacts_written();
        s.run();
        Json outputs = Json::object();
        for (const auto& p : ctx.take_touched()) {
            outputs[fs::relative(p, dir).generic_string()] = hex64(fnv1a64(read_text_file(p)));
        }
        state["stages"][s.name] = outputs;
        upstream_changed = upstream_changed || ctx.artifacts_written() != before;
        summary.stages_run.push_back(s.name);
        Json doc = state;
        doc["_header"] = ctx.header("state");
        ctx.write(state_path, doc.dump(2) + "\n");
        ctx.take_touched();
    }
    summary.artifacts_written = ctx.artifacts_written();
    return summary;
}

} // namespace antirip
