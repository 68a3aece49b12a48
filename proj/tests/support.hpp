#pragma once

#include "antirip/catalog.hpp"
#include "antirip/config.hpp"
#include "antirip/crawler.hpp"
#include "antirip/pipeline.hpp"
#include "antirip/simulator.hpp"
#include "antirip/text.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace antirip::testing {

inline std::filesystem::path data_dir() { return ANTIRIP_DATA_DIR; }

/// Fresh, empty scratch directory unique to this process.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() /
               ("antirip_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline const Catalog& fixture_catalog() {
    static const Catalog cat =
        ingest_catalog(data_dir() / "catalog.jsonl", Stoplist::load(data_dir() / "stoplist.txt"));
    return cat;
}

inline std::vector<std::string> lexicon_words() {
    std::vector<std::string> out;
    for (const auto& w : read_lines(data_dir() / "lexicon.txt")) out.push_back(w);
    return out;
}

/// Entities a depth-bounded crawl must reach, computed from the planted link table:
/// fresh public entities seed the walk, channels pass their public links on, bots do not.
inline std::set<std::string> closure_oracle(const Ecosystem& eco, Timestamp now, int window_days,
                                            int max_depth) {
    const auto removed = eco.platform->removed_entities();
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& e : eco.truth.edges) {
        if (e.kind != LinkKind::invite) out[e.src_id].push_back(e.target);
    }
    std::map<std::string, ChannelRecord> records;
    std::map<std::string, std::string> id_by_handle;
    for (const auto& r : eco.platform->entities()) {
        records[r.id] = r;
        if (r.handle) id_by_handle[text::to_lower(*r.handle)] = r.id;
    }

    std::set<std::string> seen;
    std::deque<std::pair<std::string, int>> queue;
    for (const auto& [id, r] : records) {
        if (removed.count(id) || !r.handle) continue;
        const auto age = now - r.earliest_post_time;
        if (age >= 0 && age <= static_cast<Timestamp>(window_days) * kSecondsPerDay) {
            seen.insert(id);
            queue.emplace_back(id, 0);
        }
    }
    while (!queue.empty()) {
        auto [id, depth] = queue.front();
        queue.pop_front();
        if (depth >= max_depth || records[id].is_bot) continue;
        for (const auto& h : out[id]) {
            auto it = id_by_handle.find(h);
            if (it == id_by_handle.end() || removed.count(it->second)) continue;
            if (seen.insert(it->second).second) queue.emplace_back(it->second, depth + 1);
        }
    }
    return seen;
}

inline std::set<std::string> discovered_ids(const DiscoveryResult& d) {
    std::set<std::string> ids;
    for (const auto& e : d.channels) ids.insert(e.record.id);
    for (const auto& e : d.bots) ids.insert(e.record.id);
    return ids;
}

/// The planted 30-channel ecosystem used by the end-to-end checks.
inline EcosystemSpec e2e_spec(std::uint64_t seed = 3) {
    EcosystemSpec spec;
    spec.seed = seed;
    spec.n_channels = 30;
    spec.n_bots = 5;
    spec.benign_fraction = 5.0 / 30.0;
    spec.role_plan.n_super = 1;
    spec.role_plan.super_outdeg = 20;
    spec.role_plan.n_terminal = 4;
    spec.lexicon = lexicon_words();
    spec.catalog = fixture_catalog().entries();
    return spec;
}

inline PipelineConfig fixture_config(const std::filesystem::path& platform_dir,
                                     const std::filesystem::path& run_dir, Timestamp now) {
    auto cfg = PipelineConfig::load(data_dir() / "pipeline.conf");
    cfg.platform_dir = platform_dir;
    cfg.run_dir = run_dir;
    cfg.now = now;
    cfg.backoff_base_ms = 0;
    return cfg;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Relative path -> bytes for every regular file under `dir`.
inline std::map<std::string, std::string> tree_bytes(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

} // namespace antirip::testing
