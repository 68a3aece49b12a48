#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "antirip/config.hpp"
#include "antirip/errors.hpp"
#include "antirip/handle_synthesis.hpp"
#include "antirip/json_io.hpp"
#include "antirip/pipeline.hpp"
#include "antirip/report.hpp"
#include "antirip/simulator.hpp"

namespace fs = std::filesystem;
using namespace antirip;

namespace {

enum Exit { ok = 0, usage = 1, stage_failure = 2, transport = 3 };

struct Globals {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<Timestamp> now;
    std::string run_dir;
};

PipelineConfig make_config(const Globals& g) {
    PipelineConfig c = g.config_path.empty() ? PipelineConfig{} : PipelineConfig::load(g.config_path);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidConfig("--set expects key=value, got " + kv);
        c.set(kv.substr(0, eq), kv.substr(eq + 1), fs::current_path());
    }
    if (g.now) c.now = g.now;
    if (!g.run_dir.empty()) c.run_dir = g.run_dir;
    return c;
}

struct Session {
    std::unique_ptr<Ecosystem> eco;
    std::unique_ptr<RunContext> ctx;
};

Session open_session(const PipelineConfig& c) {
    Session s;
    PlatformClient* platform = nullptr;
    if (!c.platform_dir.empty()) {
        s.eco = std::make_unique<Ecosystem>(load_ecosystem(c.platform_dir));
        platform = s.eco->platform.get();
    }
    s.ctx = std::make_unique<RunContext>(c, platform, &std::cerr);
    return s;
}

fs::path or_default(const std::string& given, const PipelineConfig& c, const char* name) {
    return given.empty() ? fs::path(c.run_dir) / name : fs::path(given);
}

std::vector<std::string> words_of(const std::string& path) {
    if (path.empty()) return {};
    const auto lex = load_lexicon(path);
    return {lex.terms.begin(), lex.terms.end()};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"antirip: discover, classify and report piracy channels"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "key = value configuration file");
    app.add_option("--set", g.overrides, "override a config key (key=value), repeatable");
    app.add_option("--now", g.now, "clock override, UTC seconds");
    app.add_option("--run-dir", g.run_dir, "run directory");

    std::function<int()> action;

    auto* synth = app.add_subcommand("synth", "generate candidate handles");
    std::string synth_out, synth_lexicon, synth_handles;
    std::optional<std::size_t> synth_k;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--lexicon", synth_lexicon);
    synth->add_option("--handles", synth_handles, "observed handles, one per line");
    synth->add_option("--higher-order", synth_k);
    synth->add_option("--seed", synth_seed);
    synth->add_option("--out", synth_out);
    synth->callback([&] {
        action = [&] {
            auto c = make_config(g);
            if (!synth_lexicon.empty()) c.lexicon = synth_lexicon;
            if (!synth_handles.empty()) c.observed_handles = synth_handles;
            if (synth_k) c.higher_order = *synth_k;
            if (synth_seed) c.seed = *synth_seed;
            auto s = open_session(c);
            stage_synth(*s.ctx, or_default(synth_out, c, artifact::candidates));
            return ok;
        };
    });

    auto* discover = app.add_subcommand("discover", "probe, gate and expand");
    std::string cand_in, disc_out;
    std::optional<int> window_days, max_depth;
    std::optional<std::size_t> probe_posts;
    discover->add_option("--candidates", cand_in);
    discover->add_option("--window-days", window_days);
    discover->add_option("--probe-posts", probe_posts);
    discover->add_option("--max-depth", max_depth);
    discover->add_option("--out", disc_out);
    discover->callback([&] {
        action = [&] {
            auto c = make_config(g);
            if (window_days) c.window_days = *window_days;
            if (probe_posts) c.probe_posts = *probe_posts;
            if (max_depth) c.max_depth = *max_depth;
            auto s = open_session(c);
            stage_discover(*s.ctx, or_default(cand_in, c, artifact::candidates),
                           or_default(disc_out, c, artifact::discovery));
            return ok;
        };
    });

    auto* hydrate = app.add_subcommand("hydrate", "fetch recent posts of discovered channels");
    std::string hyd_in, hyd_out;
    hydrate->add_option("--discovery", hyd_in);
    hydrate->add_option("--out", hyd_out);
    hydrate->callback([&] {
        action = [&] {
            auto c = make_config(g);
            auto s = open_session(c);
            stage_hydrate(*s.ctx, or_default(hyd_in, c, artifact::discovery), or_default(hyd_out, c, artifact::posts));
            return ok;
        };
    });

    auto* classify = app.add_subcommand("classify", "detect and categorize posts");
    std::string cls_in, cls_out;
    classify->add_option("--posts", cls_in);
    classify->add_option("--out", cls_out);
    classify->callback([&] {
        action = [&] {
            auto c = make_config(g);
            auto s = open_session(c);
            stage_classify(*s.ctx, or_default(cls_in, c, artifact::posts), or_default(cls_out, c, artifact::verdicts));
            return ok;
        };
    });

    auto* matchc = app.add_subcommand("match", "match piracy posts against the title catalog");
    std::string m_posts, m_verdicts, m_out;
    matchc->add_option("--posts", m_posts);
    matchc->add_option("--verdicts", m_verdicts);
    matchc->add_option("--out", m_out);
    matchc->callback([&] {
        action = [&] {
            auto c = make_config(g);
            auto s = open_session(c);
            stage_match(*s.ctx, or_default(m_posts, c, artifact::posts), or_default(m_verdicts, c, artifact::verdicts),
                        or_default(m_out, c, artifact::matches));
            return ok;
        };
    });

    auto* graph = app.add_subcommand("graph", "build the promotion graph");
    std::string gr_in, gr_out;
    graph->add_option("--discovery", gr_in);
    graph->add_option("--out-dir", gr_out);
    graph->callback([&] {
        action = [&] {
            auto c = make_config(g);
            auto s = open_session(c);
            stage_graph(*s.ctx, or_default(gr_in, c, artifact::discovery), or_default(gr_out, c, artifact::graph_dir));
            return ok;
        };
    });

    auto* est = app.add_subcommand("estimate", "estimate lower-bound losses");
    std::string e_posts, e_verdicts, e_matches, e_out;
    est->add_option("--posts", e_posts);
    est->add_option("--verdicts", e_verdicts);
    est->add_option("--matches", e_matches);
    est->add_option("--out", e_out);
    est->callback([&] {
        action = [&] {
            auto c = make_config(g);
            auto s = open_session(c);
            stage_estimate(*s.ctx, or_default(e_posts, c, artifact::posts), or_default(e_verdicts, c, artifact::verdicts),
                           or_default(e_matches, c, artifact::matches), or_default(e_out, c, artifact::loss));
            return ok;
        };
    });

    auto* report = app.add_subcommand("report", "write abuse reports to the outbox");
    std::string r_mode, r_disc, r_posts, r_verdicts, r_matches, r_outbox, r_index;
    bool r_url_only = false;
    report->add_option("--mode", r_mode)->check(CLI::IsMember({"event", "batched"}));
    report->add_flag("--url-only", r_url_only);
    report->add_option("--discovery", r_disc);
    report->add_option("--posts", r_posts);
    report->add_option("--verdicts", r_verdicts);
    report->add_option("--matches", r_matches);
    report->add_option("--outbox", r_outbox);
    report->add_option("--index", r_index);
    report->callback([&] {
        action = [&] {
            auto c = make_config(g);
            if (!r_mode.empty()) c.report_mode = r_mode;
            if (r_url_only) c.url_only = true;
            auto s = open_session(c);
            stage_report(*s.ctx, or_default(r_disc, c, artifact::discovery), or_default(r_posts, c, artifact::posts),
                         or_default(r_verdicts, c, artifact::verdicts), or_default(r_matches, c, artifact::matches),
                         or_default(r_outbox, c, artifact::outbox), or_default(r_index, c, artifact::reports));
            return ok;
        };
    });

    auto* trackc = app.add_subcommand("track", "check reported entities and summarize outcomes");
    std::optional<int> t_window;
    std::string t_reports, t_tracking, t_outcome;
    trackc->add_option("--window-days", t_window);
    trackc->add_option("--reports", t_reports);
    trackc->add_option("--tracking", t_tracking);
    trackc->add_option("--outcome", t_outcome);
    trackc->callback([&] {
        action = [&] {
            auto c = make_config(g);
            if (t_window) c.tracking_window_days = *t_window;
            auto s = open_session(c);
            stage_track(*s.ctx, or_default(t_reports, c, artifact::reports), or_default(t_tracking, c, artifact::tracking),
                        or_default(t_outcome, c, artifact::outcome));
            return ok;
        };
    });

    auto* run = app.add_subcommand("run", "run every stage");
    run->callback([&] {
        action = [&] {
            auto c = make_config(g);
            auto s = open_session(c);
            const auto summary = run_pipeline(*s.ctx);
            Json out{{"run_id", summary.run_id},
                     {"stages_run", summary.stages_run},
                     {"stages_skipped", summary.stages_skipped},
                     {"artifacts_written", summary.artifacts_written}};
            std::cout << out.dump(2) << '\n';
            return ok;
        };
    });

    auto* sim = app.add_subcommand("simulate", "write a synthetic platform snapshot");
    EcosystemSpec spec;
    std::string sim_out, sim_lexicon, sim_catalog;
    sim->add_option("--out", sim_out)->required();
    sim->add_option("--seed", spec.seed);
    sim->add_option("--channels", spec.n_channels);
    sim->add_option("--bots", spec.n_bots);
    sim->add_option("--benign-fraction", spec.benign_fraction);
    sim->add_option("--supers", spec.role_plan.n_super);
    sim->add_option("--super-outdeg", spec.role_plan.super_outdeg);
    sim->add_option("--terminals", spec.role_plan.n_terminal);
    sim->add_option("--invite-only", spec.role_plan.n_invite_only);
    sim->add_option("--deep", spec.role_plan.n_deep);
    sim->add_option("--dangling-rate", spec.role_plan.dangling_rate);
    sim->add_option("--now", spec.now);
    sim->add_option("--lexicon", sim_lexicon, "seed handles are built from these words");
    sim->add_option("--catalog", sim_catalog, "titles mentioned in posts");
    sim->callback([&] {
        action = [&] {
            spec.lexicon = words_of(sim_lexicon);
            if (!sim_catalog.empty()) spec.catalog = ingest_catalog(sim_catalog, {}).entries();
            const auto eco = generate_ecosystem(spec);
            save_ecosystem(eco, sim_out);
            std::cerr << "simulate: " << eco.truth.entities.size() << " entities, " << eco.truth.posts.size()
                      << " posts\n";
            return ok;
        };
    });

    auto* takedown = app.add_subcommand("takedown", "remove a share of reported channels from a snapshot");
    std::string td_dir, td_reports;
    double td_fraction = 0.4;
    std::uint64_t td_seed = 1;
    takedown->add_option("--platform-dir", td_dir)->required();
    takedown->add_option("--reports", td_reports)->required();
    takedown->add_option("--fraction", td_fraction);
    takedown->add_option("--seed", td_seed);
    takedown->callback([&] {
        action = [&] {
            auto eco = load_ecosystem(td_dir);
            std::vector<std::string> ids;
            for (const auto& j : read_jsonl(td_reports)) {
                for (const auto& c : report_from_json(j).channels) ids.push_back(c.channel.id);
            }
            const auto removed = script_takedowns(*eco.platform, ids, td_fraction, td_seed);
            save_ecosystem(eco, td_dir);
            for (const auto& id : removed) std::cout << id << '\n';
            return ok;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }
    try {
        return action();
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return usage;
    } catch (const TransportExhausted& e) {
        std::cerr << "transport exhausted: " << e.what() << '\n';
        return transport;
    } catch (const std::exception& e) {
        std::cerr << "stage failed: " << e.what() << '\n';
        return stage_failure;
    }
}
