#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "antirip/catalog.hpp"
#include "antirip/json_io.hpp"
#include "antirip/taxonomy.hpp"
#include "antirip/types.hpp"

namespace antirip {

inline constexpr const char* kUnknownRegion = "ZZ";
inline constexpr std::uint64_t kViewsPerConsumption = 100;

/// Language tag -> ISO-3166 region.
struct LanguageMap {
    std::map<std::string, std::string> regions;
    /// Lines of "<language> <REGION>"; '#' starts a comment.
    static LanguageMap load(const std::filesystem::path& path);
};

std::string infer_region(const PostRecord& post, const LanguageMap& map);

struct Price {
    double cost = 0;
    std::string currency = "USD";
};

struct StreamingOffer {
    std::string service;
    double monthly_cost = 0;
    std::string currency = "USD";
};

/// Access options for one title in one region. Region "*" applies where no regional entry exists.
struct PricingEntry {
    std::string title_id;
    std::string region;
    std::vector<StreamingOffer> streaming;
    std::optional<Price> rental;
    std::vector<Price> physical;
};

class PricingTable {
public:
    /// Throws InvalidSpec on an entry without access modes or with a non-positive cost.
    void add(PricingEntry entry);
    const PricingEntry* find(const std::string& title_id, const std::string& region) const;
    const std::map<std::pair<std::string, std::string>, PricingEntry>& entries() const { return entries_; }

private:
    std::map<std::pair<std::string, std::string>, PricingEntry> entries_;
};

PricingTable load_pricing(const std::filesystem::path& path);

struct ExchangeTable {
    /// USD per unit of currency.
    std::map<std::string, double> rates{{"USD", 1.0}};
    std::string as_of;

    /// Throws MissingFxRate.
    double to_usd(double amount, const std::string& currency) const;
    /// Throws InvalidSpec unless every rate is positive and USD is 1.
    void validate() const;
    static ExchangeTable load(const std::filesystem::path& path);
};

/// Views of one post attributed to one title.
struct ViewedTitle {
    std::string title_id;
    PostKey post;
    std::uint64_t views = 0;
    std::string region = kUnknownRegion;
};

enum class AccessMode { streaming, rental, physical };
std::string to_string(AccessMode m);

struct LossGroup {
    /// "<service>|<region>" for streaming groups, "<title>|<region>" otherwise.
    std::string key;
    AccessMode mode = AccessMode::streaming;
    std::string service;
    std::string region;
    std::vector<std::string> title_ids;
    std::uint64_t views_total = 0;
    std::uint64_t consumptions = 0;
    double unit_cost_usd = 0;
    double loss_usd = 0;
    /// Views per title, for proportional rollups.
    std::map<std::string, std::uint64_t> views_by_title;
};

struct UnpricedItem {
    std::string title_id;
    std::string region;
    std::uint64_t views = 0;
    std::string reason;
};

struct LossEstimate {
    std::vector<LossGroup> groups;
    std::vector<UnpricedItem> unpriced;
    double total_usd = 0;
};

/// Whole consumptions in a view count (one per complete hundred views).
constexpr std::uint64_t consumptions_for(std::uint64_t views) { return views / kViewsPerConsumption; }

/// Streaming titles are grouped by (cheapest service, region) and charged one month of that
/// service's lowest price per consumption. Other titles are priced one by one at the rental
/// price, else the lowest physical price.
LossEstimate estimate(const std::vector<ViewedTitle>& items, const PricingTable& pricing, const ExchangeTable& fx);

/// Best unambiguous title of each piracy post, with its views and region.
std::vector<ViewedTitle> viewed_titles(const std::vector<PostRecord>& posts,
                                       const std::vector<PostVerdict>& verdicts,
                                       const std::map<PostKey, std::vector<TitleMatch>>& matches,
                                       const LanguageMap& languages);

struct RollupCell {
    std::string country;
    MediaKind kind = MediaKind::movie;
    double loss_usd = 0;
};

/// Loss by production country and media kind. Group losses are split across titles by views
/// and across a title's countries evenly. Titles without countries go to "ZZ".
std::vector<RollupCell> rollup(const LossEstimate& est, const Catalog& catalog);

Json loss_report_json(const LossEstimate& est, const std::vector<RollupCell>& cells);

} // namespace antirip
