#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "antirip/types.hpp"

namespace antirip {

/// Flat key=value pipeline configuration.
struct PipelineConfig {
    std::filesystem::path lexicon;
    std::filesystem::path observed_handles;
    std::filesystem::path catalog;
    std::filesystem::path stoplist;
    std::filesystem::path pricing;
    std::filesystem::path fx;
    std::filesystem::path language_map;
    std::filesystem::path rights_holders;
    /// Directory holding the host signature lists.
    std::filesystem::path rules_dir;
    /// Snapshot written by `simulate`.
    std::filesystem::path platform_dir;
    std::filesystem::path run_dir = "run";

    int window_days = 7;
    std::size_t probe_posts = 10;
    std::size_t hydrate_posts = 500;
    int max_depth = 2;
    std::size_t higher_order = 2000;
    /// "rules", "subprocess:<command line>" or an http:// URL.
    std::string classifier = "rules";
    std::string group_priority;
    std::string report_mode = "batched";
    bool url_only = false;
    bool parse_mentions = true;
    double match_threshold = 0.8;
    std::size_t parallelism = 1;
    std::uint64_t seed = 1;
    /// Injected clock, UTC seconds. Absent means the system clock.
    std::optional<Timestamp> now;
    int tracking_window_days = 14;
    std::size_t backoff_base_ms = 1000;
    std::size_t max_retries = 6;
    std::string run_id;

    /// Reads `key = value` lines. Relative paths resolve against the file's directory.
    static PipelineConfig load(const std::filesystem::path& path);
    /// Applies one setting; `base` anchors relative paths. Throws InvalidConfig.
    void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {});
    /// Canonical key=value text of every setting that affects artifacts.
    std::string canonical() const;
    std::string hash() const;
    /// Run id, derived from the hash unless set.
    std::string effective_run_id() const;
    Timestamp clock() const;
    /// Checks ranges and that every configured input path exists.
    void validate() const;
};

} // namespace antirip
