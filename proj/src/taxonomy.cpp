#include "antirip/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <span>

#include "antirip/errors.hpp"
#include "antirip/json_io.hpp"
#include "antirip/links.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace {

struct LeafInfo {
    Leaf leaf;
    LabelGroup group;
    std::string_view name;
};

constexpr std::array<LeafInfo, kLeafCount> kLeaves{{
    {Leaf::direct_download, LabelGroup::InternalDistribution, "direct_download"},
    {Leaf::channel_bot_routing, LabelGroup::InternalDistribution, "channel_bot_routing"},
    {Leaf::cloud_storage, LabelGroup::ExternalDistribution, "cloud_storage"},
    {Leaf::streaming_magnet, LabelGroup::ExternalDistribution, "streaming_magnet"},
    {Leaf::dedicated_content_channel, LabelGroup::ResilienceStrategies, "dedicated_content_channel"},
    {Leaf::directory_index_channel, LabelGroup::ResilienceStrategies, "directory_index_channel"},
    {Leaf::backup_channel, LabelGroup::ResilienceStrategies, "backup_channel"},
    {Leaf::intermediary_routing, LabelGroup::ResilienceStrategies, "intermediary_routing"},
    {Leaf::vpn_proxy_mirror, LabelGroup::FacilitatingAccess, "vpn_proxy_mirror"},
    {Leaf::modded_app, LabelGroup::FacilitatingAccess, "modded_app"},
    {Leaf::streaming_credentials, LabelGroup::FacilitatingAccess, "streaming_credentials"},
    {Leaf::access_tutorial, LabelGroup::FacilitatingAccess, "access_tutorial"},
    {Leaf::content_delivery, LabelGroup::BotCategories, "content_delivery"},
    {Leaf::dynamic_retrieval, LabelGroup::BotCategories, "dynamic_retrieval"},
    {Leaf::channel_promotion, LabelGroup::BotCategories, "channel_promotion"},
    {Leaf::content_ingestion, LabelGroup::BotCategories, "content_ingestion"},
    {Leaf::content_request, LabelGroup::CommunityGrowth, "content_request"},
    {Leaf::channel_referral, LabelGroup::CommunityGrowth, "channel_referral"},
    {Leaf::forced_join, LabelGroup::CommunityGrowth, "forced_join"},
    {Leaf::credit_purchase, LabelGroup::Monetization, "credit_purchase"},
    {Leaf::premium_tier, LabelGroup::Monetization, "premium_tier"},
    {Leaf::incentivized_upload, LabelGroup::Monetization, "incentivized_upload"},
    {Leaf::resolution_encoding, LabelGroup::PresentationAccessibility, "resolution_encoding"},
    {Leaf::bundled_collection, LabelGroup::PresentationAccessibility, "bundled_collection"},
    {Leaf::subtitles_dubs, LabelGroup::PresentationAccessibility, "subtitles_dubs"},
}};

constexpr std::array<std::string_view, kLabelGroupCount> kGroupNames{
    "InternalDistribution", "ExternalDistribution", "ResilienceStrategies", "FacilitatingAccess",
    "BotCategories",        "CommunityGrowth",      "Monetization",         "PresentationAccessibility",
};

// ---- phrase tables ---------------------------------------------------------

using Phrases = std::span<const std::string_view>;

constexpr std::string_view kVideoExtensions[]{".mkv", ".mp4", ".avi", ".m4v", ".mov", ".webm",
                                   ".ts",  ".zip", ".rar", ".7z"};
constexpr std::uint64_t kLargeUploadBytes = 100ULL * 1024 * 1024;

constexpr std::string_view kRoutingVerbs[]{"get", "download", "file", "files", "start", "watch"};
constexpr std::string_view kDedicated[]{"dedicated channel", "dedicated to", "channel only for", "exclusively for"};
constexpr std::string_view kDirectory[]{"index", "directory", "list of our channels", "all our channels"};
constexpr std::string_view kBackup[]{"backup"};
constexpr std::string_view kIntermediary[]{"link in the next channel", "links are in", "unlock link",
                                "how to open the link", "get link from"};
constexpr std::string_view kVpnMirror[]{"vpn", "proxy", "mirror site", "mirror link", "unblock"};
constexpr std::string_view kModded[]{"mod apk", "modded", "cracked apk", "premium unlocked", "patched app"};
constexpr std::string_view kCredentials[]{"password:", "pass:", "login:", "email:", "shared account",
                               "account details"};
constexpr std::string_view kTutorial[]{"how to download", "how to watch", "tutorial", "step 1", "guide:",
                            "how to install"};
constexpr std::string_view kBotDelivery[]{"here is your file", "sending file", "your file is ready"};
constexpr std::string_view kBotRetrieval[]{"send me the name", "type the name", "search any", "send the title"};
constexpr std::string_view kBotIngestion[]{"upload your", "send your files", "forward files"};
constexpr std::string_view kJoin[]{"join", "subscribe", "follow"};
constexpr std::string_view kRequest[]{"request", "requests", "comment the movie you want", "comment the name"};
constexpr std::string_view kForcedJoin[]{"must join", "join all", "forced join", "join to unlock",
                              "join these channels"};
constexpr std::string_view kCredits[]{"credits", "credit", "buy points", "coins"};
constexpr std::string_view kPremium[]{"vip", "premium members", "premium tier", "premium plan",
                           "paid membership"};
constexpr std::string_view kUpload[]{"upload", "uploads", "uploading"};
constexpr std::string_view kReward[]{"earn", "reward", "rewards", "get paid"};
constexpr std::string_view kResolution[]{"480p",  "720p",   "1080p", "2160p",  "4k",     "uhd",   "hevc",
                              "x264",  "x265",   "10bit", "hdr",    "web-dl", "webdl", "webrip",
                              "bluray", "blu-ray", "brrip", "hdrip", "camrip", "hdcam"};
constexpr std::string_view kBundle[]{"complete season", "complete series", "all seasons", "all episodes",
                          "collection", "season pack", "trilogy", "box set"};
constexpr std::string_view kSubs[]{"subtitles", "subtitle", "esub", "esubs", "dubbed", "dual audio",
                        "multi audio", "hindi dub"};
constexpr std::string_view kStrongPiracy[]{"free download", "download free", "full movie", "leaked",
                                "pirated", "camrip", "hdcam"};
constexpr std::string_view kDownloadAffordance[]{"download", "watch online", "watch free", "get it here"};

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

bool boundary(const std::string& s, std::size_t pos) { return pos >= s.size() || !word_char(s[pos]); }

// Phrase occurrence whose ends fall on word boundaries.
std::optional<std::string_view> find_phrase(const std::string& lower, Phrases phrases) {
    for (auto p : phrases) {
        for (std::size_t pos = 0; (pos = lower.find(p, pos)) != std::string::npos; ++pos) {
            const bool left = pos == 0 || !word_char(lower[pos - 1]) || !word_char(p.front());
            const bool right = boundary(lower, pos + p.size()) || !word_char(p.back());
            if (left && right) return p;
        }
    }
    return std::nullopt;
}

struct Features {
    std::string lower;
    std::vector<InternalLink> links;
    std::vector<std::string> hosts;
    bool magnet = false;
    bool attachment = false;
    bool video_attachment = false;
    std::string attachment_reason;
    std::size_t public_links = 0;
    std::size_t channel_links = 0;
    std::size_t bot_links = 0;
    std::size_t invite_links = 0;
    std::optional<std::string> size_token;

    bool any_link() const { return !links.empty() || !hosts.empty() || magnet; }
};

std::vector<std::string> urls_in_text(const std::string& lower) {
    std::vector<std::string> out;
    for (std::string_view scheme : {"https://", "http://"}) {
        for (std::size_t pos = 0; (pos = lower.find(scheme, pos)) != std::string::npos;) {
            auto end = lower.find_first_of(" \t\r\n)]>\"'", pos);
            out.push_back(lower.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
            pos += scheme.size();
        }
    }
    return out;
}

Features extract_features(const PostRecord& post) {
    Features f;
    f.lower = text::to_lower(post.text);
    f.links = extract_internal_links({post}).links;
    for (const auto& l : f.links) {
        switch (l.kind) {
        case LinkKind::channel: ++f.channel_links; ++f.public_links; break;
        case LinkKind::bot: ++f.bot_links; ++f.public_links; break;
        case LinkKind::invite: ++f.invite_links; break;
        }
    }
    std::set<std::string> hosts;
    auto add_url = [&](const std::string& url) {
        const auto lower = text::to_lower(url);
        if (lower.starts_with("magnet:")) {
            f.magnet = true;
            return;
        }
        if (lower.ends_with(".torrent")) f.magnet = true;
        auto h = text::url_host(lower);
        if (!h.empty() && h != "t.me" && h != "telegram.me") hosts.insert(h);
    };
    for (const auto& u : post.external_links) add_url(u);
    for (const auto& u : urls_in_text(f.lower)) add_url(u);
    if (text::contains(f.lower, "magnet:?xt=")) f.magnet = true;
    f.hosts.assign(hosts.begin(), hosts.end());

    if (post.attachment) {
        f.attachment = true;
        const auto name = text::to_lower(post.attachment->file_name);
        for (auto ext : kVideoExtensions) {
            if (name.ends_with(ext)) {
                f.video_attachment = true;
                f.attachment_reason = "uploaded file " + post.attachment->file_name;
                break;
            }
        }
        if (!f.video_attachment && post.attachment->size_bytes >= kLargeUploadBytes) {
            f.video_attachment = true;
            f.attachment_reason =
                "large upload of " + std::to_string(post.attachment->size_bytes) + " bytes";
        }
    }

    static const std::regex size_re(R"((^|[^a-z0-9.])(\d+(\.\d+)?\s?(gb|mb))([^a-z0-9]|$))");
    std::smatch m;
    if (std::regex_search(f.lower, m, size_re)) f.size_token = m[2].str();
    return f;
}

std::optional<std::string> host_in(const std::vector<std::string>& hosts,
                                   const std::vector<std::string>& list) {
    for (const auto& h : hosts) {
        for (const auto& d : list) {
            if (text::host_matches(h, d)) return h;
        }
    }
    return std::nullopt;
}

std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

// Leaves that on their own mark a post as piracy. Community growth and presentation
// signals also appear in legitimate promotion, so they need a second signal.
bool is_piracy_signal(Leaf leaf) {
    switch (leaf) {
    case Leaf::content_request:
    case Leaf::channel_referral:
    case Leaf::resolution_encoding:
    case Leaf::bundled_collection:
    case Leaf::subtitles_dubs:
        return false;
    default:
        return true;
    }
}

} // namespace

LabelGroup group_of(Leaf leaf) { return kLeaves[static_cast<std::size_t>(leaf)].group; }

std::string_view to_string(LabelGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

std::string_view to_string(Leaf l) { return kLeaves[static_cast<std::size_t>(l)].name; }

std::optional<LabelGroup> label_group_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kGroupNames.size(); ++i) {
        if (kGroupNames[i] == s) return static_cast<LabelGroup>(i);
    }
    return std::nullopt;
}

std::optional<Leaf> leaf_from_string(std::string_view s) {
    for (const auto& info : kLeaves) {
        if (info.name == s) return info.leaf;
    }
    return std::nullopt;
}

const std::array<Leaf, kLeafCount>& all_leaves() {
    static const auto leaves = [] {
        std::array<Leaf, kLeafCount> out{};
        for (std::size_t i = 0; i < kLeafCount; ++i) out[i] = kLeaves[i].leaf;
        return out;
    }();
    return leaves;
}

bool verdict_well_formed(const PostVerdict& v) {
    if (v.labels.size() > kMaxLabels) return false;
    if (!v.is_piracy && !v.labels.empty()) return false;
    for (std::size_t i = 0; i < v.labels.size(); ++i) {
        for (std::size_t j = i + 1; j < v.labels.size(); ++j) {
            if (v.labels[i].label == v.labels[j].label) return false;
        }
    }
    return true;
}

GroupPriority default_group_priority() {
    return {LabelGroup::InternalDistribution, LabelGroup::ExternalDistribution,
            LabelGroup::ResilienceStrategies, LabelGroup::FacilitatingAccess,
            LabelGroup::Monetization,         LabelGroup::CommunityGrowth,
            LabelGroup::PresentationAccessibility, LabelGroup::BotCategories};
}

GroupPriority parse_group_priority(std::string_view csv) {
    GroupPriority out{};
    std::set<LabelGroup> seen;
    std::size_t n = 0;
    for (const auto& part : text::split(csv, ',')) {
        auto g = label_group_from_string(text::trim(part));
        if (!g) throw InvalidConfig("unknown label group: " + text::trim(part));
        if (!seen.insert(*g).second) throw InvalidConfig("duplicate label group: " + part);
        if (n == out.size()) throw InvalidConfig("too many label groups");
        out[n++] = *g;
    }
    if (n != out.size()) throw InvalidConfig("group priority must list all eight groups");
    return out;
}

RuleBook RuleBook::load(const std::filesystem::path& dir) {
    RuleBook rb;
    rb.cloud_hosts = read_lines(dir / "cloud_hosts.txt");
    rb.streaming_hosts = read_lines(dir / "streaming_hosts.txt");
    rb.shortener_hosts = read_lines(dir / "shortener_hosts.txt");
    for (auto* list : {&rb.cloud_hosts, &rb.streaming_hosts, &rb.shortener_hosts}) {
        for (auto& h : *list) h = text::to_lower(h);
    }
    return rb;
}

RuleClassifier::RuleClassifier(RuleBook rules, TitleProbe title_probe)
    : rules_(std::move(rules)), title_probe_(std::move(title_probe)) {}

std::vector<LabelAssignment> RuleClassifier::matching_leaves(const PostRecord& post,
                                                             const PostContext& ctx) const {
    const Features f = extract_features(post);
    const auto& t = f.lower;
    std::array<std::optional<std::string>, kLeafCount> hit{};
    auto set = [&](Leaf leaf, std::string why) { hit[static_cast<std::size_t>(leaf)] = std::move(why); };

    if (f.video_attachment) set(Leaf::direct_download, f.attachment_reason);
    if (f.bot_links > 0) {
        if (auto v = find_phrase(t, kRoutingVerbs)) {
            set(Leaf::channel_bot_routing, "routes users to a bot with " + quoted(*v));
        }
    }
    if (auto h = host_in(f.hosts, rules_.cloud_hosts)) set(Leaf::cloud_storage, "cloud storage link on " + *h);
    if (f.magnet) {
        set(Leaf::streaming_magnet, "magnet or torrent link");
    } else if (auto h = host_in(f.hosts, rules_.streaming_hosts)) {
        set(Leaf::streaming_magnet, "streaming or torrent site " + *h);
    }
    if (auto v = find_phrase(t, kDedicated)) set(Leaf::dedicated_content_channel, "dedicated channel marker " + quoted(*v));
    if (f.public_links >= 3) {
        set(Leaf::directory_index_channel, "lists " + std::to_string(f.public_links) + " channel links");
    } else if (auto v = find_phrase(t, kDirectory)) {
        set(Leaf::directory_index_channel, "directory marker " + quoted(*v));
    }
    if (auto v = find_phrase(t, kBackup)) set(Leaf::backup_channel, "backup marker " + quoted(*v));
    if (auto h = host_in(f.hosts, rules_.shortener_hosts)) {
        set(Leaf::intermediary_routing, "link routed through " + *h);
    } else if (auto v = find_phrase(t, kIntermediary)) {
        set(Leaf::intermediary_routing, "intermediary routing marker " + quoted(*v));
    }
    if (auto v = find_phrase(t, kVpnMirror)) set(Leaf::vpn_proxy_mirror, "access workaround " + quoted(*v));
    if (auto v = find_phrase(t, kModded)) set(Leaf::modded_app, "modified app marker " + quoted(*v));
    if (auto v = find_phrase(t, kCredentials)) set(Leaf::streaming_credentials, "credential marker " + quoted(*v));
    if (auto v = find_phrase(t, kTutorial)) set(Leaf::access_tutorial, "access guide marker " + quoted(*v));

    if (ctx.author_is_bot) {
        if (f.attachment) {
            set(Leaf::content_delivery, "bot delivers an uploaded file");
        } else if (auto v = find_phrase(t, kBotDelivery)) {
            set(Leaf::content_delivery, "bot delivery marker " + quoted(*v));
        }
        if (auto v = find_phrase(t, kBotRetrieval)) set(Leaf::dynamic_retrieval, "bot search marker " + quoted(*v));
        if (f.channel_links > 0 && find_phrase(t, kJoin)) set(Leaf::channel_promotion, "bot promotes channels");
        if (auto v = find_phrase(t, kBotIngestion)) set(Leaf::content_ingestion, "bot collects uploads " + quoted(*v));
    }

    if (auto v = find_phrase(t, kRequest)) set(Leaf::content_request, "content request marker " + quoted(*v));
    if (f.channel_links > 0) {
        if (auto v = find_phrase(t, kJoin)) set(Leaf::channel_referral, "asks users to " + std::string(*v) + " another channel");
    }
    if (auto v = find_phrase(t, kForcedJoin)) set(Leaf::forced_join, "access gated on joining " + quoted(*v));
    if (auto v = find_phrase(t, kCredits)) set(Leaf::credit_purchase, "credit purchase marker " + quoted(*v));
    if (auto v = find_phrase(t, kPremium)) set(Leaf::premium_tier, "paid tier marker " + quoted(*v));
    if (find_phrase(t, kUpload)) {
        if (auto v = find_phrase(t, kReward)) set(Leaf::incentivized_upload, "rewards uploads " + quoted(*v));
    }
    if (auto v = find_phrase(t, kResolution)) set(Leaf::resolution_encoding, "quality tag " + quoted(*v));
    if (auto v = find_phrase(t, kBundle)) set(Leaf::bundled_collection, "bundle marker " + quoted(*v));
    if (auto v = find_phrase(t, kSubs)) set(Leaf::subtitles_dubs, "language track marker " + quoted(*v));

    std::vector<LabelAssignment> out;
    for (LabelGroup g : rules_.priority) {
        if (g == LabelGroup::BotCategories && !ctx.author_is_bot) continue;
        for (Leaf leaf : all_leaves()) {
            if (group_of(leaf) != g) continue;
            if (auto& why = hit[static_cast<std::size_t>(leaf)]) {
                out.push_back({TaxonomyLabel{leaf}, std::string(to_string(leaf)) + ": " + *why});
            }
        }
    }
    return out;
}

bool RuleClassifier::detect(const PostRecord& post, const PostContext& ctx) {
    for (const auto& a : matching_leaves(post, ctx)) {
        if (is_piracy_signal(a.label.leaf)) return true;
    }
    const Features f = extract_features(post);
    const bool affordance = f.any_link() || f.attachment;
    if (find_phrase(f.lower, kResolution) && f.size_token && affordance) return true;
    if (find_phrase(f.lower, kStrongPiracy)) return true;
    if (title_probe_ && affordance && find_phrase(f.lower, kDownloadAffordance) && title_probe_(post)) {
        return true;
    }
    return false;
}

PostVerdict RuleClassifier::categorize(const PostRecord& post, const PostContext& ctx) {
    auto labels = matching_leaves(post, ctx);
    if (labels.empty()) {
        throw NoLabelMatch("no taxonomy leaf matches post " + post.channel_id + "/" +
                           std::to_string(post.post_id));
    }
    if (labels.size() > kMaxLabels) labels.resize(kMaxLabels);
    return PostVerdict{key_of(post), true, std::move(labels)};
}

PostVerdict classify_post(ClassifierAdapter& adapter, const PostRecord& post,
                          const PostContext& ctx, bool* unlabeled) {
    if (unlabeled) *unlabeled = false;
    if (!adapter.detect(post, ctx)) return PostVerdict{key_of(post), false, {}};
    try {
        auto v = adapter.categorize(post, ctx);
        v.post = key_of(post);
        v.is_piracy = true;
        return v;
    } catch (const NoLabelMatch&) {
        if (unlabeled) *unlabeled = true;
        return PostVerdict{key_of(post), true, {}};
    }
}

ClassificationMetrics evaluate(const std::vector<PostVerdict>& verdicts,
                               const std::vector<PostVerdict>& truth) {
    if (verdicts.size() != truth.size()) {
        throw LengthMismatch("verdicts: " + std::to_string(verdicts.size()) +
                             ", truth: " + std::to_string(truth.size()));
    }
    ClassificationMetrics m;
    m.n = verdicts.size();
    std::size_t piracy = 0, p_ok = 0, s1_ok = 0, s2_ok = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        const auto& t = truth[i];
        if (v.is_piracy && t.is_piracy) ++m.true_positive;
        else if (v.is_piracy) ++m.false_positive;
        else if (t.is_piracy) ++m.false_negative;
        else ++m.true_negative;
        if (!t.is_piracy) continue;
        ++piracy;
        // Cumulative: each level requires every earlier level to be right as well.
        const bool primary = v.is_piracy && v.primary() && v.primary() == t.primary();
        const bool first = primary && v.secondary(0) == t.secondary(0);
        const bool second = first && v.secondary(1) == t.secondary(1);
        p_ok += primary;
        s1_ok += first;
        s2_ok += second;
    }
    auto ratio = [](std::size_t num, std::size_t den, double empty) {
        return den == 0 ? empty : static_cast<double>(num) / static_cast<double>(den);
    };
    const std::size_t positives = m.true_positive + m.false_negative;
    m.accuracy = ratio(m.true_positive + m.true_negative, m.n, 1.0);
    m.precision = ratio(m.true_positive, m.true_positive + m.false_positive, positives == 0 ? 1.0 : 0.0);
    m.recall = ratio(m.true_positive, positives, 1.0);
    m.f1 = (m.precision + m.recall) == 0 ? 0.0 : 2 * m.precision * m.recall / (m.precision + m.recall);
    m.primary_accuracy = ratio(p_ok, piracy, 1.0);
    m.primary_s1_accuracy = ratio(s1_ok, piracy, 1.0);
    m.primary_s1_s2_accuracy = ratio(s2_ok, piracy, 1.0);
    return m;
}

} // namespace antirip
