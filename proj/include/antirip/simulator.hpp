#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "antirip/catalog.hpp"
#include "antirip/platform.hpp"
#include "antirip/taxonomy.hpp"
#include "antirip/types.hpp"

namespace antirip {

/// Every Nth call fails; 0 disables the fault.
struct FaultPlan {
    std::size_t rate_limit_every = 0;
    std::size_t transport_fail_every = 0;
};

/// In-memory platform. All methods are internally synchronized.
class SimulatedPlatform final : public PlatformClient {
public:
    SimulatedPlatform() = default;
    SimulatedPlatform(const SimulatedPlatform&) = delete;
    SimulatedPlatform& operator=(const SimulatedPlatform&) = delete;

    /// Registers an entity. Posts may come in any order; post ids must be unique.
    void add_entity(ChannelRecord record, std::vector<PostRecord> posts);
    void remove_channel(const std::string& id);
    void remove_post(const std::string& channel_id, std::int64_t post_id);
    bool is_removed(const std::string& id) const;
    bool is_post_removed(const std::string& channel_id, std::int64_t post_id) const;

    void set_fault_plan(FaultPlan plan);

    std::optional<ChannelRecord> resolve_handle(std::string_view handle) override;
    std::vector<PostRecord> fetch_posts(const std::string& channel_id, std::size_t limit) override;
    std::optional<ChannelRecord> channel_meta(const std::string& channel_id) override;

    std::size_t fetch_count(const std::string& channel_id) const;
    std::size_t resolve_count() const;
    void reset_counters();

    /// Every entity, removed ones included, ordered by id.
    std::vector<ChannelRecord> entities() const;
    /// Every post (removed ones included) of every entity, ordered by (channel, post id).
    std::vector<PostRecord> all_posts() const;
    std::set<std::string> removed_entities() const;
    std::set<PostKey> removed_posts() const;

private:
    struct Entity {
        ChannelRecord record;
        std::vector<PostRecord> posts; // ascending post_id
        bool removed = false;
        std::set<std::int64_t> removed_posts;
    };

    void maybe_fail();

    mutable std::mutex mu_;
    std::map<std::string, Entity> entities_;
    std::map<std::string, std::string> by_handle_;
    FaultPlan faults_;
    std::size_t calls_ = 0;
    std::size_t resolves_ = 0;
    std::map<std::string, std::size_t> fetches_;
};

// ---- planted ground truth ----------------------------------------------------

struct PostTruth {
    PostKey post;
    bool is_piracy = false;
    /// Planted labels in priority order (first is primary).
    std::vector<Leaf> labels;
    std::optional<std::string> title_id;
    /// Template that produced the post.
    std::string template_name;

    PostVerdict as_verdict() const;
};

struct EntityTruth {
    std::string id;
    std::string handle;
    bool is_bot = false;
    bool piracy = false;
    /// Planted hop distance from the fresh seeds; -1 for channels outside the link tree.
    int layer = -1;
    /// regular | super | terminal | isolated; empty for bots and removed channels.
    std::string planted_role;
    bool fresh = false;
    /// Removed before the crawl (target of dangling links).
    bool dangling = false;
    bool invite_only = false;
    std::optional<Leaf> bot_category;
};

struct EdgeTruth {
    std::string src_id;
    LinkKind kind = LinkKind::channel;
    /// Lowercased handle, or the invite hash.
    std::string target;
};

struct GroundTruth {
    std::vector<EntityTruth> entities;
    std::vector<PostTruth> posts;
    std::vector<EdgeTruth> edges;

    const EntityTruth* entity(const std::string& id) const;
    const EntityTruth* entity_by_handle(const std::string& handle) const;
    const PostTruth* post(const PostKey& key) const;
};

// ---- generator -----------------------------------------------------------------

struct RolePlan {
    std::size_t n_super = 0;
    std::size_t super_outdeg = 0;
    std::size_t n_terminal = 0;
    std::size_t n_invite_only = 0;
    /// Piracy channels planted three hops out, beyond the default crawl depth.
    std::size_t n_deep = 0;
    /// Regular channels among the fresh seeds; 0 picks a quarter of the regulars.
    std::size_t n_seed_regular = 0;
    std::size_t regular_max_outdeg = 3;
    /// Per extra link slot of a regular channel.
    double dangling_rate = 0.0;
    double bot_link_rate = 0.1;
    /// Extra link slots may point anywhere already planted, not only one layer down.
    bool free_links = false;
};

struct TaxonomyPlan {
    /// Share of piracy posts among a piracy channel's non-link posts.
    double piracy_post_rate = 0.8;
    /// Share of piracy posts written so that no surface marker reveals them.
    double covert_rate = 0.02;
    std::size_t posts_min = 4;
    std::size_t posts_max = 16;
};

struct EcosystemSpec {
    std::uint64_t seed = 1;
    std::size_t n_channels = 30;
    std::size_t n_bots = 5;
    RolePlan role_plan;
    TaxonomyPlan taxonomy_plan;
    double benign_fraction = 0.2;
    Timestamp now = 1767225600; // 2026-01-01T00:00:00Z
    /// Words used to build seed handles; seeds are reachable by synthesizing from these.
    std::vector<std::string> lexicon;
    std::vector<CatalogEntry> catalog;
    std::vector<std::string> languages{"en", "hi", "fa", "es", "ar", "ru", "id", "tr"};
};

struct Ecosystem {
    std::unique_ptr<SimulatedPlatform> platform;
    GroundTruth truth;
    Timestamp now = 0;
    std::uint64_t seed = 0;
};

/// Deterministic in the spec. Throws InvalidSpec.
Ecosystem generate_ecosystem(const EcosystemSpec& spec);

struct GeneratedPost {
    PostRecord post;
    PostTruth truth;
};

/// Standalone posts drawn from the same behavior templates, for classifier evaluation.
std::vector<GeneratedPost> generate_post_corpus(std::uint64_t seed, std::size_t n,
                                                double piracy_fraction,
                                                const std::vector<CatalogEntry>& catalog,
                                                double covert_rate = 0.02);

/// Writes channels.jsonl, posts.jsonl and truth.jsonl.
void save_ecosystem(const Ecosystem& eco, const std::filesystem::path& dir);
Ecosystem load_ecosystem(const std::filesystem::path& dir);

/// Removes `fraction` of `entity_ids` (rounded to nearest), chosen by seed; returns them sorted.
std::vector<std::string> script_takedowns(SimulatedPlatform& platform,
                                          std::vector<std::string> entity_ids, double fraction,
                                          std::uint64_t seed);

} // namespace antirip
