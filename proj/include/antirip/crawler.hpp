#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "antirip/handle_synthesis.hpp"
#include "antirip/links.hpp"
#include "antirip/platform.hpp"
#include "antirip/types.hpp"

namespace antirip {

enum class Origin { handle_synthesis, link };

std::string to_string(Origin o);

struct DiscoveredEntity {
    ChannelRecord record;
    int depth = 0;
    Origin origin = Origin::handle_synthesis;
    /// Internal links found in the entity's probe window (bots have none).
    std::vector<InternalLink> links;
};

struct DiscoveryResult {
    /// Sorted by (depth, id).
    std::vector<DiscoveredEntity> channels;
    std::vector<DiscoveredEntity> bots;
    /// Distinct link targets that did not resolve or were removed.
    std::size_t dead_links = 0;
    std::size_t malformed_links = 0;
};

struct ProbeStats {
    std::size_t probed = 0;
    std::size_t rejected = 0;
    std::size_t unresolved = 0;
};

/// Resolves candidates, dropping invalid, unknown and removed handles.
/// Throws std::invalid_argument on an empty candidate set.
std::vector<ChannelRecord> probe(PlatformClient& client, const CandidateSet& candidates,
                                 ProbeStats* stats = nullptr);

inline constexpr int kDefaultWindowDays = 7;

/// Inclusive: now - earliest_post_time <= window_days days.
bool recency_gate(const ChannelRecord& channel, Timestamp now, int window_days = kDefaultWindowDays);

struct CrawlOptions {
    std::size_t probe_posts = 10;
    int max_depth = 2;
    std::size_t parallelism = 1;
    LinkExtractionOptions links;
};

/// Breadth-first expansion from the seeds. Seeds enter at depth 0 as given; gate them first.
/// Every entity is fetched at most once. Bots and invite links are not followed.
DiscoveryResult expand(PlatformClient& client, const std::vector<ChannelRecord>& seeds,
                       const CrawlOptions& opts = {});

} // namespace antirip
