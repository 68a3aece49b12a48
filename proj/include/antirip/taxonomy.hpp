#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "antirip/types.hpp"

namespace antirip {

enum class LabelGroup {
    InternalDistribution,
    ExternalDistribution,
    ResilienceStrategies,
    FacilitatingAccess,
    BotCategories,
    CommunityGrowth,
    Monetization,
    PresentationAccessibility,
};

inline constexpr std::size_t kLabelGroupCount = 8;

// Declaration order is the within-group tie order for primary-label selection.
enum class Leaf {
    direct_download,
    channel_bot_routing,
    cloud_storage,
    streaming_magnet,
    dedicated_content_channel,
    directory_index_channel,
    backup_channel,
    intermediary_routing,
    vpn_proxy_mirror,
    modded_app,
    streaming_credentials,
    access_tutorial,
    content_delivery,
    dynamic_retrieval,
    channel_promotion,
    content_ingestion,
    content_request,
    channel_referral,
    forced_join,
    credit_purchase,
    premium_tier,
    incentivized_upload,
    resolution_encoding,
    bundled_collection,
    subtitles_dubs,
};

inline constexpr std::size_t kLeafCount = 25;

LabelGroup group_of(Leaf leaf);
std::string_view to_string(LabelGroup g);
std::string_view to_string(Leaf l);
std::optional<LabelGroup> label_group_from_string(std::string_view s);
std::optional<Leaf> leaf_from_string(std::string_view s);
const std::array<Leaf, kLeafCount>& all_leaves();

/// A leaf of the taxonomy; the group is implied by the leaf.
struct TaxonomyLabel {
    Leaf leaf = Leaf::direct_download;

    LabelGroup group() const { return group_of(leaf); }
    friend bool operator==(const TaxonomyLabel&, const TaxonomyLabel&) = default;
};

struct LabelAssignment {
    TaxonomyLabel label;
    std::string justification;

    friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;
};

inline constexpr std::size_t kMaxLabels = 3;

/// Piracy decision for one post. labels[0] is the primary label, the rest secondary.
struct PostVerdict {
    PostKey post;
    bool is_piracy = false;
    std::vector<LabelAssignment> labels;

    std::optional<TaxonomyLabel> primary() const {
        if (labels.empty()) return std::nullopt;
        return labels.front().label;
    }
    /// Secondary label i (0-based), if assigned.
    std::optional<TaxonomyLabel> secondary(std::size_t i) const {
        if (labels.size() <= i + 1) return std::nullopt;
        return labels[i + 1].label;
    }
};

/// Checks the verdict shape: at most three distinct labels, none unless piracy.
bool verdict_well_formed(const PostVerdict& v);

struct PostContext {
    bool author_is_bot = false;
};

/// Two-stage classifier: categorize is only consulted after detect returned true.
class ClassifierAdapter {
public:
    virtual ~ClassifierAdapter() = default;
    virtual bool detect(const PostRecord& post, const PostContext& ctx) = 0;
    /// Throws NoLabelMatch when the post matches no taxonomy leaf.
    virtual PostVerdict categorize(const PostRecord& post, const PostContext& ctx) = 0;
};

/// Group order used to pick the primary label (first = highest priority).
using GroupPriority = std::array<LabelGroup, kLabelGroupCount>;

GroupPriority default_group_priority();

/// Parses a comma-separated list of all eight group names.
GroupPriority parse_group_priority(std::string_view csv);

/// Host signature lists and label ordering used by the rule engine.
struct RuleBook {
    std::vector<std::string> cloud_hosts;
    std::vector<std::string> streaming_hosts;
    std::vector<std::string> shortener_hosts;
    GroupPriority priority = default_group_priority();

    /// Reads cloud_hosts.txt, streaming_hosts.txt and shortener_hosts.txt from `dir`.
    static RuleBook load(const std::filesystem::path& dir);
};

/// Optional hook that reports whether a post mentions a catalog title.
using TitleProbe = std::function<bool(const PostRecord&)>;

/// Deterministic reference classifier.
class RuleClassifier final : public ClassifierAdapter {
public:
    explicit RuleClassifier(RuleBook rules, TitleProbe title_probe = {});

    bool detect(const PostRecord& post, const PostContext& ctx) override;
    PostVerdict categorize(const PostRecord& post, const PostContext& ctx) override;

    /// Every matching leaf in priority order, with its justification.
    std::vector<LabelAssignment> matching_leaves(const PostRecord& post,
                                                 const PostContext& ctx) const;

    const RuleBook& rules() const { return rules_; }

private:
    RuleBook rules_;
    TitleProbe title_probe_;
};

/// detect, then categorize. A categorizer that finds no leaf yields an unlabeled
/// piracy verdict and `*unlabeled` is set.
PostVerdict classify_post(ClassifierAdapter& adapter, const PostRecord& post,
                          const PostContext& ctx, bool* unlabeled = nullptr);

struct ClassificationMetrics {
    std::size_t n = 0;
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    /// Over posts that are piracy in the truth.
    double primary_accuracy = 0;
    double primary_s1_accuracy = 0;
    double primary_s1_s2_accuracy = 0;
};

/// Detection metrics and cumulative label accuracies. Throws LengthMismatch.
ClassificationMetrics evaluate(const std::vector<PostVerdict>& verdicts,
                               const std::vector<PostVerdict>& truth);

} // namespace antirip
