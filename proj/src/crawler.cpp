#include "antirip/crawler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

#include "antirip/errors.hpp"
#include "antirip/text.hpp"

namespace antirip {

std::string to_string(Origin o) { return o == Origin::link ? "link" : "handle-synthesis"; }

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

bool by_depth_then_id(const DiscoveredEntity& a, const DiscoveredEntity& b) {
    return std::tie(a.depth, a.record.id) < std::tie(b.depth, b.record.id);
}

} // namespace

std::vector<ChannelRecord> probe(PlatformClient& client, const CandidateSet& candidates, ProbeStats* stats) {
    if (candidates.candidates.empty()) throw std::invalid_argument("probe needs at least one candidate");
    ProbeStats local;
    std::map<std::string, ChannelRecord> found;
    for (const auto& c : candidates.candidates) {
        if (!handle_ok(c)) {
            ++local.rejected;
            continue;
        }
        ++local.probed;
        auto rec = client.resolve_handle(c);
        if (!rec) {
            ++local.unresolved;
            continue;
        }
        found.emplace(rec->id, std::move(*rec));
    }
    if (stats) *stats = local;
    std::vector<ChannelRecord> out;
    for (auto& [id, rec] : found) out.push_back(std::move(rec));
    return out;
}

bool recency_gate(const ChannelRecord& channel, Timestamp now, int window_days) {
    return now - channel.earliest_post_time <= static_cast<Timestamp>(window_days) * kSecondsPerDay;
}

DiscoveryResult expand(PlatformClient& client, const std::vector<ChannelRecord>& seeds, const CrawlOptions& opts) {
    if (opts.max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
    if (opts.probe_posts == 0) throw std::invalid_argument("probe_posts must be >= 1");

    DiscoveryResult result;
    std::set<std::string> visited;
    std::set<std::string> seen_handles;

    std::vector<DiscoveredEntity> level;
    for (const auto& s : seeds) {
        if (!visited.insert(s.id).second) continue;
        if (s.handle) seen_handles.insert(text::to_lower(*s.handle));
        level.push_back({s, 0, Origin::handle_synthesis, {}});
    }
    std::sort(level.begin(), level.end(), by_depth_then_id);

    for (int depth = 0; !level.empty(); ++depth) {
        // Fetch every channel of this level once.
        std::vector<char> gone(level.size(), 0);
        std::vector<std::size_t> malformed(level.size(), 0);
        parallel_for(level.size(), opts.parallelism, [&](std::size_t i) {
            auto& e = level[i];
            if (e.record.is_bot) return;
            try {
                auto posts = fetch_posts(client, e.record.id, opts.probe_posts);
                auto ex = extract_internal_links(posts, opts.links);
                e.links = std::move(ex.links);
                malformed[i] = ex.malformed;
            } catch (const ChannelGone&) {
                gone[i] = 1;
            }
        });

        std::vector<std::string> targets;
        std::set<std::string> wanted;
        for (std::size_t i = 0; i < level.size(); ++i) {
            result.malformed_links += malformed[i];
            if (gone[i]) {
                ++result.dead_links;
                continue;
            }
            auto& e = level[i];
            (e.record.is_bot ? result.bots : result.channels).push_back(e);
            if (depth >= opts.max_depth) continue;
            for (const auto& l : e.links) {
                if (l.kind == LinkKind::invite) continue;
                if (!seen_handles.count(l.target) && wanted.insert(l.target).second) targets.push_back(l.target);
            }
        }
        if (depth >= opts.max_depth) break;

        std::sort(targets.begin(), targets.end());
        std::vector<std::optional<ChannelRecord>> resolved(targets.size());
        parallel_for(targets.size(), opts.parallelism, [&](std::size_t i) {
            if (!handle_ok(targets[i])) return;
            resolved[i] = client.resolve_handle(targets[i]);
        });

        std::vector<DiscoveredEntity> next;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            seen_handles.insert(targets[i]);
            if (!resolved[i]) {
                ++result.dead_links;
                continue;
            }
            if (!visited.insert(resolved[i]->id).second) continue;
            next.push_back({std::move(*resolved[i]), depth + 1, Origin::link, {}});
        }
        std::sort(next.begin(), next.end(), by_depth_then_id);
        level = std::move(next);
    }

    std::sort(result.channels.begin(), result.channels.end(), by_depth_then_id);
    std::sort(result.bots.begin(), result.bots.end(), by_depth_then_id);
    return result;
}

} // namespace antirip
