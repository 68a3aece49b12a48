#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "antirip/catalog.hpp"
#include "antirip/errors.hpp"
#include "antirip/json_io.hpp"
#include "antirip/platform.hpp"
#include "antirip/taxonomy.hpp"
#include "antirip/types.hpp"

namespace antirip {

class OutsideWindow : public Error {
public:
    using Error::Error;
};

enum class ReportMode { event, batched };
std::string to_string(ReportMode m);
ReportMode report_mode_from_string(const std::string& s);

inline constexpr Timestamp kBatchWindow = kSecondsPerDay;
inline constexpr int kTrackingWindowDays = 14;

/// Production company -> abuse contact.
struct RightsHolderMap {
    std::map<std::string, std::string> contacts;
    /// Lines of "<company>=<contact>"; company names are matched case-insensitively.
    static RightsHolderMap load(const std::filesystem::path& path);
    std::optional<std::string> contact_for(const std::string& company) const;
};

struct Recipient {
    /// "platform" or "rights_holder".
    std::string kind = "platform";
    std::string name = "platform";
    std::string contact;
    /// Outbox directory name.
    std::string slug() const;
    friend bool operator==(const Recipient&, const Recipient&) = default;
};

struct EvidenceItem {
    PostKey post;
    Timestamp time = 0;
    std::string url;
    std::optional<std::string> title;
    std::optional<std::string> title_id;
    std::optional<std::string> screenshot_ref;
    std::vector<InternalLink> internal_links;
    std::vector<std::string> external_links;
    std::vector<LabelAssignment> labels;
};

struct ReportedChannel {
    ChannelRecord channel;
    std::vector<EvidenceItem> items;
};

struct AbuseReport {
    std::string report_id;
    Recipient recipient;
    /// Ordered by channel id; items by post id.
    std::vector<ReportedChannel> channels;
    /// Submission time.
    Timestamp created_at = 0;
    ReportMode mode = ReportMode::event;
    bool url_only = false;
    /// Detection times covered, for the 24-hour bound.
    Timestamp first_detection = 0;
    Timestamp last_detection = 0;

    std::size_t item_count() const;
};

struct ReportInputs {
    std::vector<ChannelRecord> channels;
    std::vector<PostRecord> posts;
    std::vector<PostVerdict> verdicts;
    std::map<PostKey, std::vector<TitleMatch>> matches;
    const Catalog* catalog = nullptr;
    RightsHolderMap rights_holders;
};

struct ReportOptions {
    ReportMode mode = ReportMode::batched;
    bool url_only = false;
    /// Submission time stamped on every report.
    Timestamp now = 0;
};

struct ReportBuild {
    std::vector<AbuseReport> reports;
    /// Channels requested without any piracy post.
    std::vector<std::string> skipped_no_evidence;
    /// Matched companies with no contact in the rights-holder map.
    std::vector<std::string> unmapped_companies;
};

/// All piracy evidence of one channel for one recipient. Throws NoEvidence when empty.
ReportedChannel evidence_for(const ReportInputs& in, const std::string& channel_id, const Recipient& recipient);

/// Platform report over every channel with piracy posts, plus one report stream per mapped
/// rights holder. A channel is detected at the time of its newest piracy post.
ReportBuild build_reports(const ReportInputs& in, const ReportOptions& opts);

Json report_json(const AbuseReport& r);
AbuseReport report_from_json(const Json& j);
std::string render_text(const AbuseReport& r);

/// Writes <outbox>/<recipient>/<report_id>.json and .txt. Returns the paths written.
std::vector<std::filesystem::path> write_outbox(const std::vector<AbuseReport>& reports,
                                                const std::filesystem::path& outbox, const Json& header);

// ---- tracking ------------------------------------------------------------------

enum class CheckStatus { alive, gone, skipped };
std::string to_string(CheckStatus s);
CheckStatus check_status_from_string(const std::string& s);

struct TrackingCheck {
    Timestamp time = 0;
    CheckStatus status = CheckStatus::alive;
    std::size_t post_removed = 0;
    std::string note;
};

enum class EnforcementFeedback { confirmed, none };

struct TrackingRecord {
    std::string entity_id;
    bool is_bot = false;
    Timestamp reported_at = 0;
    int window_days = kTrackingWindowDays;
    std::vector<std::string> recipients;
    std::vector<std::int64_t> reported_post_ids;
    std::vector<TrackingCheck> checks;
    std::optional<EnforcementFeedback> enforcement_feedback;

    std::optional<CheckStatus> last_status() const;
};

/// One record per reported entity, merging every recipient that received it.
std::vector<TrackingRecord> tracking_records(const std::vector<AbuseReport>& reports);

/// Probes one entity and appends a check. Throws OutsideWindow unless
/// reported_at <= now <= reported_at + window.
void check_entity(PlatformClient& client, TrackingRecord& record, Timestamp now, std::size_t post_limit = 500);

struct TrackStats {
    std::size_t checked = 0;
    std::size_t outside_window = 0;
    std::size_t skipped = 0;
};

/// check_entity over every record; records outside their window are left unchanged.
TrackStats track(PlatformClient& client, std::vector<TrackingRecord>& records, Timestamp now,
                 std::size_t post_limit = 500);

Json tracking_json(const TrackingRecord& r);
TrackingRecord tracking_from_json(const Json& j);

struct RemovalStats {
    std::size_t reported = 0;
    std::size_t gone = 0;
    /// Absent when nothing was reported.
    std::optional<double> removal_rate;
    /// Median removed-post count over entities still alive.
    std::optional<double> median_posts_removed;
};

struct OutcomeSummary {
    RemovalStats overall;
    RemovalStats channels;
    RemovalStats bots;
    std::map<std::string, RemovalStats> by_recipient;
};

OutcomeSummary outcome_summary(const std::vector<TrackingRecord>& records);
Json outcome_json(const OutcomeSummary& s);

} // namespace antirip
