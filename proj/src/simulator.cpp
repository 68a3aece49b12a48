#include "antirip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "antirip/errors.hpp"
#include "antirip/handle_synthesis.hpp"
#include "antirip/json_io.hpp"
#include "antirip/links.hpp"
#include "antirip/rng.hpp"
#include "antirip/text.hpp"

namespace antirip {

// ---- SimulatedPlatform -------------------------------------------------------

void SimulatedPlatform::add_entity(ChannelRecord record, std::vector<PostRecord> posts) {
    std::lock_guard lock(mu_);
    if (entities_.count(record.id)) throw InvalidSpec("duplicate entity id " + record.id);
    if (record.handle) {
        if (!handle_ok(*record.handle)) throw InvalidSpec("bad handle " + *record.handle);
        auto key = text::to_lower(*record.handle);
        if (by_handle_.count(key)) throw InvalidSpec("duplicate handle " + key);
        by_handle_.emplace(std::move(key), record.id);
    }
    std::sort(posts.begin(), posts.end(),
              [](const PostRecord& a, const PostRecord& b) { return a.post_id < b.post_id; });
    for (std::size_t i = 1; i < posts.size(); ++i) {
        if (posts[i].post_id == posts[i - 1].post_id) throw InvalidSpec("duplicate post id in " + record.id);
    }
    for (auto& p : posts) {
        p.channel_id = record.id;
        if (p.attachment && p.attachment->size_bytes > kMaxAttachmentBytes) {
            throw InvalidSpec("attachment over 2 GiB in " + record.id);
        }
    }
    auto id = record.id;
    entities_.emplace(std::move(id), Entity{std::move(record), std::move(posts), false, {}});
}

void SimulatedPlatform::remove_channel(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = entities_.find(id);
    if (it == entities_.end()) throw std::out_of_range("unknown entity " + id);
    it->second.removed = true;
}

void SimulatedPlatform::remove_post(const std::string& channel_id, std::int64_t post_id) {
    std::lock_guard lock(mu_);
    auto it = entities_.find(channel_id);
    if (it == entities_.end()) throw std::out_of_range("unknown entity " + channel_id);
    it->second.removed_posts.insert(post_id);
}

bool SimulatedPlatform::is_removed(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = entities_.find(id);
    return it != entities_.end() && it->second.removed;
}

bool SimulatedPlatform::is_post_removed(const std::string& channel_id, std::int64_t post_id) const {
    std::lock_guard lock(mu_);
    auto it = entities_.find(channel_id);
    return it != entities_.end() && it->second.removed_posts.count(post_id) > 0;
}

void SimulatedPlatform::set_fault_plan(FaultPlan plan) {
    std::lock_guard lock(mu_);
    faults_ = plan;
    calls_ = 0;
}

void SimulatedPlatform::maybe_fail() {
    ++calls_;
    if (faults_.rate_limit_every && calls_ % faults_.rate_limit_every == 0) {
        throw RateLimited("simulated rate limit");
    }
    if (faults_.transport_fail_every && calls_ % faults_.transport_fail_every == 0) {
        throw TransportFailure("simulated transport failure");
    }
}

std::optional<ChannelRecord> SimulatedPlatform::resolve_handle(std::string_view handle) {
    std::lock_guard lock(mu_);
    maybe_fail();
    ++resolves_;
    auto h = by_handle_.find(text::to_lower(handle));
    if (h == by_handle_.end()) return std::nullopt;
    const auto& e = entities_.at(h->second);
    if (e.removed) return std::nullopt;
    return e.record;
}

std::vector<PostRecord> SimulatedPlatform::fetch_posts(const std::string& channel_id, std::size_t limit) {
    std::lock_guard lock(mu_);
    maybe_fail();
    ++fetches_[channel_id];
    auto it = entities_.find(channel_id);
    if (it == entities_.end()) throw std::out_of_range("unknown entity " + channel_id);
    if (it->second.removed) throw ChannelGone(channel_id);
    std::vector<PostRecord> out;
    const auto& posts = it->second.posts;
    for (auto p = posts.rbegin(); p != posts.rend() && out.size() < limit; ++p) {
        if (!it->second.removed_posts.count(p->post_id)) out.push_back(*p);
    }
    return out;
}

std::optional<ChannelRecord> SimulatedPlatform::channel_meta(const std::string& channel_id) {
    std::lock_guard lock(mu_);
    maybe_fail();
    auto it = entities_.find(channel_id);
    if (it == entities_.end()) return std::nullopt;
    if (it->second.removed) throw ChannelGone(channel_id);
    return it->second.record;
}

std::size_t SimulatedPlatform::fetch_count(const std::string& channel_id) const {
    std::lock_guard lock(mu_);
    auto it = fetches_.find(channel_id);
    return it == fetches_.end() ? 0 : it->second;
}

std::size_t SimulatedPlatform::resolve_count() const {
    std::lock_guard lock(mu_);
    return resolves_;
}

void SimulatedPlatform::reset_counters() {
    std::lock_guard lock(mu_);
    fetches_.clear();
    resolves_ = 0;
    calls_ = 0;
}

std::vector<ChannelRecord> SimulatedPlatform::entities() const {
    std::lock_guard lock(mu_);
    std::vector<ChannelRecord> out;
    for (const auto& [id, e] : entities_) out.push_back(e.record);
    return out;
}

std::vector<PostRecord> SimulatedPlatform::all_posts() const {
    std::lock_guard lock(mu_);
    std::vector<PostRecord> out;
    for (const auto& [id, e] : entities_) out.insert(out.end(), e.posts.begin(), e.posts.end());
    return out;
}

std::set<std::string> SimulatedPlatform::removed_entities() const {
    std::lock_guard lock(mu_);
    std::set<std::string> out;
    for (const auto& [id, e] : entities_) {
        if (e.removed) out.insert(id);
    }
    return out;
}

std::set<PostKey> SimulatedPlatform::removed_posts() const {
    std::lock_guard lock(mu_);
    std::set<PostKey> out;
    for (const auto& [id, e] : entities_) {
        for (auto p : e.removed_posts) out.insert({id, p});
    }
    return out;
}

// ---- ground truth ---------------------------------------------------------------

PostVerdict PostTruth::as_verdict() const {
    PostVerdict v{post, is_piracy, {}};
    for (Leaf l : labels) v.labels.push_back({TaxonomyLabel{l}, "planted"});
    return v;
}

const EntityTruth* GroundTruth::entity(const std::string& id) const {
    for (const auto& e : entities) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

const EntityTruth* GroundTruth::entity_by_handle(const std::string& handle) const {
    const auto h = text::to_lower(handle);
    for (const auto& e : entities) {
        if (e.handle == h) return &e;
    }
    return nullptr;
}

const PostTruth* GroundTruth::post(const PostKey& key) const {
    auto it = std::lower_bound(posts.begin(), posts.end(), key,
                               [](const PostTruth& t, const PostKey& k) { return t.post < k; });
    if (it != posts.end() && it->post == key) return &*it;
    for (const auto& t : posts) {
        if (t.post == key) return &t;
    }
    return nullptr;
}

// ---- post templates ---------------------------------------------------------------

namespace {

const std::vector<std::string> kFallbackWords{"movies", "series", "films", "cinema", "rip", "hd",
                                              "flix",   "tv",     "hub",   "world",  "box", "club"};

const std::vector<std::string> kFallbackTitles{"Crimson Harbor", "The Silent Meridian",
                                               "Paper Lanterns", "Northbound Static"};

std::string random_code(Rng& rng, std::size_t n, bool upper = false) {
    static constexpr char lower[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    static constexpr char mixed[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(upper ? mixed[rng.below(sizeof mixed - 1)] : lower[rng.below(sizeof lower - 1)]);
    }
    return s;
}

double normal(Rng& rng) {
    double u1 = rng.unit();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = rng.unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

struct TitleRef {
    std::string title;
    int year = 2020;
    bool tv = false;
    std::optional<std::string> id;
};

TitleRef pick_title(Rng& rng, const std::vector<CatalogEntry>& catalog) {
    if (catalog.empty()) {
        return {rng.pick(kFallbackTitles), static_cast<int>(rng.range(1990, 2025)), false, std::nullopt};
    }
    const auto& e = rng.pick(catalog);
    return {e.title, e.year, e.kind == MediaKind::tv, e.id};
}

std::string resolution(Rng& rng) {
    static const std::vector<std::string> r{"480p", "720p", "1080p", "2160p"};
    return rng.pick(r);
}

std::string encoding(Rng& rng) {
    static const std::vector<std::string> e{"WEB-DL", "HDRip", "BluRay", "x265", "HEVC", "WEBRip"};
    return rng.pick(e);
}

std::string size_text(Rng& rng) {
    if (rng.chance(0.3)) return std::to_string(rng.range(300, 950)) + "MB";
    return std::to_string(rng.range(1, 9)) + "." + std::to_string(rng.range(0, 9)) + "GB";
}

std::string render_link(Rng& rng, const std::string& handle, bool& structured_only) {
    structured_only = false;
    switch (rng.below(5)) {
    case 0: return "https://t.me/" + handle;
    case 1: return "t.me/s/" + handle;
    case 2: return "@" + handle;
    case 3: structured_only = true; return "our channel";
    default: return "t.me/" + handle;
    }
}

struct Draft {
    std::string text;
    std::vector<std::string> external;
    std::vector<InternalLink> structured;
    std::optional<Attachment> attachment;
    std::vector<Leaf> labels;
    bool piracy = false;
    std::optional<std::string> title_id;
    std::string name;
};

using L = Leaf;

// Content posts. Each template's text carries exactly the markers of its labels.
Draft piracy_content(Rng& rng, const std::vector<CatalogEntry>& catalog) {
    const TitleRef t = pick_title(rng, catalog);
    const std::string year = std::to_string(t.year);
    Draft d;
    d.piracy = true;
    d.title_id = t.id;
    switch (rng.below(14)) {
    case 0: {
        const auto res = resolution(rng), enc = encoding(rng);
        d.name = "direct_download";
        d.text = t.title + " (" + year + ")\n" + res + " " + enc + " | " + size_text(rng);
        d.labels = {L::direct_download, L::resolution_encoding};
        if (rng.chance(0.3)) {
            d.text += "\nESubs";
            d.labels.push_back(L::subtitles_dubs);
        }
        const auto size = static_cast<std::uint64_t>(rng.range(400, 2048)) * 1024 * 1024;
        d.attachment = Attachment{text::slug(t.title) + "." + year + "." + res + ".mkv", size};
        break;
    }
    case 1: {
        static const std::vector<std::string> hosts{"https://terabox.com/s/1", "https://gofile.io/d/",
                                                    "https://www.mediafire.com/file/", "https://pan.quark.cn/s/",
                                                    "https://www.alipan.com/s/"};
        d.name = "cloud_storage";
        const auto url = rng.pick(hosts) + random_code(rng, 10);
        d.text = t.title + " " + year + " " + resolution(rng);
        d.labels = {L::cloud_storage, L::resolution_encoding};
        if (t.tv && rng.chance(0.5)) {
            d.text += " Complete Season " + std::to_string(rng.range(1, 6));
            d.labels.push_back(L::bundled_collection);
        }
        d.text += "\nDownload: " + url;
        d.external.push_back(url);
        break;
    }
    case 2: {
        static const std::vector<std::string> hosts{"https://fmovies.to/watch/", "https://hianime.to/watch/",
                                                    "https://soap2day.to/movie/"};
        d.name = "streaming_site";
        const auto url = rng.pick(hosts) + text::slug(t.title) + "-" + random_code(rng, 5);
        d.text = "Watch " + t.title + " online: " + url;
        d.labels = {L::streaming_magnet};
        if (rng.chance(0.3)) {
            d.text += " (Dual Audio)";
            d.labels.push_back(L::subtitles_dubs);
        }
        break;
    }
    case 3: {
        d.name = "magnet";
        std::string hash;
        for (int i = 0; i < 40; ++i) hash.push_back("0123456789abcdef"[rng.below(16)]);
        const auto uri = "magnet:?xt=urn:btih:" + hash;
        d.text = t.title + " " + year + " " + resolution(rng) + "\n" + uri;
        d.external.push_back(uri);
        d.labels = {L::streaming_magnet, L::resolution_encoding};
        break;
    }
    case 4:
        d.name = "dedicated_channel";
        d.text = "This is the dedicated channel for " + t.title + ". New episodes uploaded daily.";
        d.labels = {L::dedicated_content_channel};
        break;
    case 5: {
        static const std::vector<std::string> hosts{"https://gplinks.co/", "https://shrinkme.io/", "https://ouo.io/"};
        d.name = "shortener";
        const auto url = rng.pick(hosts) + random_code(rng, 6, true);
        d.text = t.title + " (" + year + ") download link: " + url;
        d.labels = {L::intermediary_routing};
        break;
    }
    case 6:
        d.name = "vpn_mirror";
        d.text = t.title + " site blocked in your country? Use a VPN or our mirror site https://" +
                 random_code(rng, 7) + ".site";
        d.labels = {L::vpn_proxy_mirror};
        break;
    case 7: {
        static const std::vector<std::string> apps{"Netflix", "Disney+", "Prime Video", "HBO Max"};
        d.name = "modded_app";
        d.text = rng.pick(apps) + " MOD APK premium unlocked, no ads. Watch " + t.title +
                 " free: https://apk" + random_code(rng, 5) + ".io/app";
        d.labels = {L::modded_app};
        break;
    }
    case 8: {
        static const std::vector<std::string> services{"Netflix", "Disney+", "Crunchyroll", "Hulu"};
        d.name = "credentials";
        d.text = "Free " + rng.pick(services) + " shared account\nEmail: " + random_code(rng, 8) +
                 "@mail.com\nPassword: " + random_code(rng, 10, true);
        d.labels = {L::streaming_credentials};
        d.title_id.reset();
        break;
    }
    case 9:
        d.name = "tutorial";
        d.text = "Tutorial: how to watch " + t.title +
                 " without paying. Step 1: open the site. Step 2: pick a server.";
        d.labels = {L::access_tutorial};
        break;
    case 10:
        d.name = "content_request";
        d.text = "Request any movie or series in the comments, full movie uploads every night.";
        d.labels = {L::content_request};
        d.title_id.reset();
        break;
    case 11:
        d.name = "credit_purchase";
        d.text = "Buy credits to unlock premium download links for " + t.title + ".";
        d.labels = {L::credit_purchase};
        break;
    case 12:
        d.name = "premium_tier";
        d.text = "VIP members get " + t.title + " in 4K HDR before anyone else. Pay $3/month.";
        d.labels = {L::premium_tier, L::resolution_encoding};
        break;
    default:
        d.name = "incentivized_upload";
        d.text = "Upload new movies to our group and earn rewards every week.";
        d.labels = {L::incentivized_upload};
        d.title_id.reset();
        break;
    }
    return d;
}

// Piracy offered through a private contact; nothing in the text gives it away.
Draft covert_piracy(Rng& rng, const std::vector<CatalogEntry>& catalog) {
    const TitleRef t = pick_title(rng, catalog);
    Draft d;
    d.name = "covert";
    d.piracy = true;
    d.title_id = t.id;
    d.text = "Ask the admin privately for " + t.title + ", sent within minutes.";
    d.labels = {L::intermediary_routing};
    return d;
}

Draft benign_post(Rng& rng, const std::vector<CatalogEntry>& catalog) {
    const TitleRef t = pick_title(rng, catalog);
    const std::string year = std::to_string(t.year);
    Draft d;
    d.title_id = t.id;
    switch (rng.below(7)) {
    case 0:
        d.name = "news";
        d.text = t.title + " (" + year + ") box office update: strong opening weekend in cinemas.";
        break;
    case 1: {
        d.name = "trailer";
        const auto url = "https://youtube.com/watch?v=" + random_code(rng, 11, true);
        d.text = "Official trailer for " + t.title + " is out now in 4K: " + url;
        d.external.push_back(url);
        break;
    }
    case 2: {
        d.name = "review";
        const auto url = "https://www.imdb.com/title/tt" + std::to_string(rng.range(1000000, 9999999)) + "/";
        d.text = "Review: " + t.title + " is a tense, beautifully shot film. " +
                 std::to_string(rng.range(5, 9)) + "/10. Full review: " + url;
        d.external.push_back(url);
        break;
    }
    case 3:
        d.name = "discussion";
        d.text = "What did you think of the " + t.title + " finale? Tell us below.";
        break;
    case 4:
        d.name = "release_info";
        d.text = t.title + " arrives on Netflix next week with subtitles in 30 languages.";
        break;
    case 5:
        d.name = "box_set";
        d.text = t.title + " collection box set now on Blu-ray at your local store.";
        break;
    default:
        d.name = "legal_question";
        d.text = "Where can I legally download " + t.title + "? Asking for a friend.";
        break;
    }
    return d;
}

struct LinkTarget {
    LinkKind kind;
    std::string handle;
};

Draft link_post(Rng& rng, const std::vector<LinkTarget>& targets, bool directory,
                const std::vector<CatalogEntry>& catalog) {
    Draft d;
    d.piracy = true;
    if (directory) {
        d.name = "directory";
        d.text = "Our channel index:";
        for (const auto& t : targets) {
            d.text += "\nhttps://t.me/" + t.handle;
        }
        d.labels = {L::directory_index_channel};
        return d;
    }
    const auto& t = targets.front();
    if (t.kind == LinkKind::invite) {
        d.name = "invite_backup";
        d.text = "Private backup group: https://t.me/+" + t.handle;
        d.labels = {L::backup_channel};
        return d;
    }
    bool structured = false;
    const auto link = render_link(rng, t.handle, structured);
    if (structured) d.structured.push_back({t.kind, t.handle});
    if (t.kind == LinkKind::bot) {
        const TitleRef title = pick_title(rng, catalog);
        d.name = "bot_routing";
        d.title_id = title.id;
        d.text = "Get " + title.title + " from our bot " + link;
        d.labels = {L::channel_bot_routing};
        return d;
    }
    switch (rng.below(3)) {
    case 0:
        d.name = "backup";
        d.text = "Join our backup channel " + link + " in case this one gets banned";
        d.labels = {L::backup_channel, L::channel_referral};
        break;
    case 1:
        d.name = "referral";
        d.text = "Join " + link + " for free download of all new releases";
        d.labels = {L::channel_referral};
        break;
    default:
        d.name = "forced_join";
        d.text = "You must join " + link + " to unlock the download";
        d.labels = {L::channel_referral, L::forced_join};
        break;
    }
    return d;
}

// ---- ecosystem planning ---------------------------------------------------------

enum class Plan { super, regular, terminal, invite_only, deep, benign };

struct Node {
    std::string id;
    std::string handle;
    Plan plan = Plan::regular;
    int layer = -1;
    bool fresh = false;
    bool bot = false;
    bool dangling = false;
    std::optional<Leaf> bot_category;
    std::vector<LinkTarget> out; // distinct
    std::size_t indeg = 0;
};

class HandleFactory {
public:
    HandleFactory(Rng& rng, std::vector<std::string> words) : rng_(rng), words_(std::move(words)) {
        if (words_.empty()) words_ = kFallbackWords;
        std::vector<std::string> clean;
        for (auto& w : words_) {
            auto v = valid_fragments({w});
            if (!v.empty()) clean.push_back(*v.begin());
        }
        std::sort(clean.begin(), clean.end());
        clean.erase(std::unique(clean.begin(), clean.end()), clean.end());
        words_ = std::move(clean);
    }

    // Two lexicon words, so synthesis over the lexicon can produce it.
    std::optional<std::string> seed_handle() {
        for (int attempt = 0; attempt < 4000 && words_.size() >= 2; ++attempt) {
            const auto& a = rng_.pick(words_);
            const auto& b = rng_.pick(words_);
            if (a == b) continue;
            auto h = a + (rng_.chance(0.5) ? "_" : "") + b;
            if (handle_ok(h) && !looks_like_bot_handle(h) && used_.insert(h).second) return h;
        }
        return std::nullopt;
    }

    std::string linked_handle(std::string_view suffix = "") {
        for (;;) {
            auto h = rng_.pick(words_) + "_" + rng_.pick(words_) + std::to_string(rng_.range(10, 99)) +
                     std::string(suffix);
            if (h.size() > 32 || !std::isalpha(static_cast<unsigned char>(h[0]))) {
                h = "ch_" + random_code(rng_, 6) + std::to_string(rng_.range(10, 99)) + std::string(suffix);
            }
            if (!suffix.empty() || !looks_like_bot_handle(h)) {
                if (handle_ok(h) && used_.insert(h).second) return h;
            }
        }
    }

private:
    Rng& rng_;
    std::vector<std::string> words_;
    std::set<std::string> used_;
};

void validate(const EcosystemSpec& spec) {
    const auto& rp = spec.role_plan;
    const auto& tp = spec.taxonomy_plan;
    auto ratio_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!ratio_ok(spec.benign_fraction) || !ratio_ok(rp.dangling_rate) || !ratio_ok(rp.bot_link_rate) ||
        !ratio_ok(tp.piracy_post_rate) || !ratio_ok(tp.covert_rate)) {
        throw InvalidSpec("ratios must lie in [0, 1]");
    }
    if (tp.posts_min < 1 || tp.posts_max < tp.posts_min) throw InvalidSpec("bad post count range");
    if (rp.regular_max_outdeg < 1) throw InvalidSpec("regular_max_outdeg must be >= 1");
    if (rp.n_super > 0 && rp.super_outdeg == 0) throw InvalidSpec("super channels need an out-degree");
    if (rp.super_outdeg > 80) throw InvalidSpec("super_outdeg above 80 does not fit the probe window");
}

constexpr std::size_t kProbeWindow = 10;
constexpr std::size_t kDirectoryChunk = 8;

} // namespace

Ecosystem generate_ecosystem(const EcosystemSpec& spec) {
    validate(spec);
    const auto& rp = spec.role_plan;
    Rng rng(spec.seed);
    HandleFactory handles(rng, spec.lexicon);

    const auto n_benign = static_cast<std::size_t>(std::llround(spec.benign_fraction * static_cast<double>(spec.n_channels)));
    const std::size_t n_piracy = spec.n_channels - n_benign;
    const std::size_t fixed = rp.n_super + rp.n_terminal + rp.n_invite_only + rp.n_deep;
    if (fixed > n_piracy) throw InvalidSpec("role plan needs more piracy channels than planned");
    const std::size_t n_regular = n_piracy - fixed;

    std::vector<Node> nodes;
    auto make_id = [](char prefix, std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%c%04zu", prefix, i);
        return std::string(buf);
    };

    // Role assignment over a seeded permutation of piracy channel slots.
    std::vector<Plan> plans;
    plans.insert(plans.end(), rp.n_super, Plan::super);
    plans.insert(plans.end(), rp.n_invite_only, Plan::invite_only);
    plans.insert(plans.end(), rp.n_terminal, Plan::terminal);
    plans.insert(plans.end(), rp.n_deep, Plan::deep);
    plans.insert(plans.end(), n_regular, Plan::regular);
    rng.shuffle(plans);
    plans.insert(plans.end(), n_benign, Plan::benign);

    std::size_t seed_regulars = rp.n_seed_regular ? std::min(rp.n_seed_regular, n_regular)
                                                  : std::max<std::size_t>(n_regular > 0 ? 1 : 0, n_regular / 4);
    std::size_t regular_seen = 0, regular_rest = n_regular - seed_regulars, rest_seen = 0, terminal_seen = 0;
    const std::size_t layer1_regulars = (regular_rest + 1) / 2;

    for (std::size_t i = 0; i < plans.size(); ++i) {
        Node n;
        n.id = make_id('c', i + 1);
        n.plan = plans[i];
        switch (n.plan) {
        case Plan::super:
        case Plan::invite_only:
            n.layer = 0;
            break;
        case Plan::regular:
            if (regular_seen++ < seed_regulars) {
                n.layer = 0;
            } else {
                n.layer = rest_seen++ < layer1_regulars ? 1 : 2;
            }
            break;
        case Plan::terminal:
            n.layer = (layer1_regulars > 0 && regular_rest > layer1_regulars && terminal_seen++ % 2 == 1) ? 2 : 1;
            break;
        case Plan::deep:
            n.layer = 3;
            break;
        case Plan::benign:
            n.layer = -1;
            n.fresh = rng.chance(0.5);
            break;
        }
        if (n.layer == 0) n.fresh = true;
        if (n.fresh) {
            auto h = handles.seed_handle();
            if (!h) throw InvalidSpec("lexicon too small for the number of seed channels");
            n.handle = *h;
        } else {
            n.handle = handles.linked_handle();
        }
        nodes.push_back(std::move(n));
    }

    std::vector<Node> bots;
    static constexpr Leaf kBotKinds[] = {L::content_delivery, L::dynamic_retrieval, L::channel_promotion,
                                         L::content_ingestion};
    for (std::size_t i = 0; i < spec.n_bots; ++i) {
        Node b;
        b.id = make_id('b', i + 1);
        b.bot = true;
        b.handle = handles.linked_handle("_bot");
        b.bot_category = kBotKinds[rng.below(4)];
        bots.push_back(std::move(b));
    }

    std::vector<Node> dangling;
    auto new_dangling = [&]() -> LinkTarget {
        Node d;
        d.id = make_id('x', dangling.size() + 1);
        d.dangling = true;
        d.handle = handles.linked_handle();
        dangling.push_back(d);
        return {LinkKind::channel, d.handle};
    };

    auto in_layer = [&](int layer, bool linkers_only) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& n = nodes[i];
            if (n.layer != layer) continue;
            if (linkers_only && n.plan != Plan::regular && n.plan != Plan::super) continue;
            out.push_back(i);
        }
        return out;
    };
    auto has_target = [](const Node& n, const std::string& h) {
        return std::any_of(n.out.begin(), n.out.end(), [&](const LinkTarget& t) { return t.handle == h; });
    };
    auto link = [&](Node& src, LinkTarget t) {
        if (src.handle == t.handle || has_target(src, t.handle)) return false;
        src.out.push_back(std::move(t));
        return true;
    };

    // Tree links guarantee each planted node sits exactly `layer` hops from the seeds.
    for (int layer = 1; layer <= 3; ++layer) {
        auto parents = in_layer(layer - 1, true);
        std::vector<std::size_t> regular_parents;
        for (auto p : parents) {
            if (nodes[p].plan == Plan::regular) regular_parents.push_back(p);
        }
        if (!regular_parents.empty()) parents = regular_parents;
        for (auto child : in_layer(layer, false)) {
            if (parents.empty()) {
                throw InvalidSpec("no linking channel at layer " + std::to_string(layer - 1));
            }
            std::size_t best = parents[rng.below(parents.size())];
            for (auto p : parents) {
                if (nodes[p].out.size() < nodes[best].out.size()) best = p;
            }
            link(nodes[best], {LinkKind::channel, nodes[child].handle});
        }
    }

    auto pick_channel_target = [&](const Node& src) -> std::optional<std::size_t> {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& n = nodes[i];
            if (n.plan == Plan::benign || n.plan == Plan::invite_only || n.handle == src.handle) continue;
            if (!rp.free_links && n.layer > src.layer + 1) continue;
            if (has_target(src, n.handle)) continue;
            pool.push_back(i);
        }
        if (pool.empty()) return std::nullopt;
        return pool[rng.below(pool.size())];
    };

    for (auto& n : nodes) {
        if (n.plan == Plan::super) {
            std::vector<LinkTarget> pool;
            for (const auto& m : nodes) {
                if (m.layer >= 1 && m.layer <= 2 && m.plan != Plan::invite_only && !has_target(n, m.handle)) {
                    pool.push_back({LinkKind::channel, m.handle});
                }
            }
            for (const auto& b : bots) pool.push_back({LinkKind::bot, b.handle});
            rng.shuffle(pool);
            for (const auto& t : pool) {
                if (n.out.size() >= rp.super_outdeg) break;
                link(n, t);
            }
            while (n.out.size() < rp.super_outdeg) link(n, new_dangling());
        } else if (n.plan == Plan::regular || n.plan == Plan::deep) {
            const auto want = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(rp.regular_max_outdeg)));
            for (std::size_t slot = 0; n.out.size() < want && slot < 4 * want; ++slot) {
                if (!bots.empty() && rng.chance(rp.bot_link_rate)) {
                    link(n, {LinkKind::bot, rng.pick(bots).handle});
                } else if (rng.chance(rp.dangling_rate)) {
                    link(n, new_dangling());
                } else if (auto t = pick_channel_target(n)) {
                    link(n, {LinkKind::channel, nodes[*t].handle});
                }
            }
        } else if (n.plan == Plan::invite_only) {
            const auto k = rng.range(1, 2);
            for (std::int64_t i = 0; i < k; ++i) n.out.push_back({LinkKind::invite, random_code(rng, 12, true)});
        }
    }

    // In-degrees over public links, for the planted roles.
    std::map<std::string, std::size_t> indeg;
    for (const auto& n : nodes) {
        for (const auto& t : n.out) {
            if (t.kind != LinkKind::invite) ++indeg[t.handle];
        }
    }

    Ecosystem eco;
    eco.platform = std::make_unique<SimulatedPlatform>();
    eco.now = spec.now;
    eco.seed = spec.seed;
    const auto& tp = spec.taxonomy_plan;

    auto add_channel = [&](const Node& n, bool piracy) {
        ChannelRecord rec;
        rec.id = n.id;
        rec.handle = n.handle;
        rec.title = n.handle;
        rec.is_bot = false;
        rec.subscriber_count = static_cast<std::uint64_t>(std::exp(6.3 + 1.5 * normal(rng)));
        const Timestamp age = n.fresh ? rng.range(kSecondsPerDay / 2, 6 * kSecondsPerDay + kSecondsPerDay / 2)
                                      : rng.range(10 * kSecondsPerDay, 400 * kSecondsPerDay);
        rec.earliest_post_time = spec.now - age;

        // Link posts: directory chunks for wide fan-out, one post per target otherwise.
        std::vector<Draft> link_drafts;
        std::vector<LinkTarget> invites, publics;
        for (const auto& t : n.out) (t.kind == LinkKind::invite ? invites : publics).push_back(t);
        if (publics.size() > 6) {
            for (std::size_t i = 0; i < publics.size(); i += kDirectoryChunk) {
                std::vector<LinkTarget> chunk(publics.begin() + static_cast<std::ptrdiff_t>(i),
                                              publics.begin() + static_cast<std::ptrdiff_t>(std::min(publics.size(), i + kDirectoryChunk)));
                link_drafts.push_back(link_post(rng, chunk, true, spec.catalog));
            }
        } else {
            for (const auto& t : publics) link_drafts.push_back(link_post(rng, {t}, false, spec.catalog));
        }
        for (const auto& t : invites) link_drafts.push_back(link_post(rng, {t}, false, spec.catalog));

        std::size_t n_posts = static_cast<std::size_t>(rng.range(static_cast<std::int64_t>(tp.posts_min),
                                                                  static_cast<std::int64_t>(tp.posts_max)));
        n_posts = std::max(n_posts, link_drafts.size() + 1);
        if (link_drafts.size() > kProbeWindow) throw InvalidSpec("too many link posts for " + n.id);

        // Slots: newest window holds the link posts in random positions.
        std::vector<std::optional<Draft>> slots(n_posts);
        std::vector<std::size_t> recent;
        for (std::size_t i = n_posts - std::min(n_posts, kProbeWindow); i < n_posts; ++i) recent.push_back(i);
        rng.shuffle(recent);
        for (std::size_t i = 0; i < link_drafts.size(); ++i) slots[recent[i]] = std::move(link_drafts[i]);
        for (std::size_t i = 0; i < n_posts; ++i) {
            if (slots[i]) continue;
            if (!piracy) {
                slots[i] = benign_post(rng, spec.catalog);
            } else if (i == n_posts - 1) {
                slots[i] = piracy_content(rng, spec.catalog);
            } else if (rng.chance(tp.piracy_post_rate)) {
                slots[i] = rng.chance(tp.covert_rate) ? covert_piracy(rng, spec.catalog)
                                                      : piracy_content(rng, spec.catalog);
            } else {
                slots[i] = benign_post(rng, spec.catalog);
            }
        }

        std::vector<Timestamp> times{rec.earliest_post_time};
        for (std::size_t i = 1; i < n_posts; ++i) times.push_back(rng.range(rec.earliest_post_time + 1, spec.now - 60));
        std::sort(times.begin(), times.end());

        const auto lang = rng.pick(spec.languages);
        std::vector<PostRecord> posts;
        for (std::size_t i = 0; i < n_posts; ++i) {
            auto& d = *slots[i];
            PostRecord p;
            p.channel_id = n.id;
            p.post_id = static_cast<std::int64_t>(i + 1);
            p.time = times[i];
            p.text = d.text;
            p.view_count = static_cast<std::uint64_t>(static_cast<double>(rec.subscriber_count) *
                                                      std::exp(0.8 * normal(rng)));
            p.internal_links = d.structured;
            p.external_links = d.external;
            p.attachment = d.attachment;
            p.language_tag = lang;
            p.screenshot_ref = "screenshots/" + n.id + "/" + std::to_string(p.post_id) + ".png";
            eco.truth.posts.push_back(PostTruth{key_of(p), d.piracy, d.labels, d.title_id, d.name});
            posts.push_back(std::move(p));
        }
        eco.platform->add_entity(std::move(rec), std::move(posts));
    };

    for (const auto& n : nodes) {
        const bool piracy = n.plan != Plan::benign;
        add_channel(n, piracy);
        EntityTruth t;
        t.id = n.id;
        t.handle = n.handle;
        t.piracy = piracy;
        t.layer = n.layer;
        t.fresh = n.fresh;
        t.invite_only = n.plan == Plan::invite_only;
        std::size_t outdeg = 0;
        for (const auto& o : n.out) outdeg += o.kind != LinkKind::invite;
        const std::size_t in = indeg.count(n.handle) ? indeg[n.handle] : 0;
        if (n.plan == Plan::super) t.planted_role = "super";
        else if (outdeg > 0) t.planted_role = "regular";
        else if (in > 0) t.planted_role = "terminal";
        else t.planted_role = "isolated";
        eco.truth.entities.push_back(std::move(t));
        for (const auto& o : n.out) eco.truth.edges.push_back({n.id, o.kind, o.handle});
    }
    for (const auto& b : bots) {
        ChannelRecord rec;
        rec.id = b.id;
        rec.handle = b.handle;
        rec.title = b.handle;
        rec.is_bot = true;
        rec.subscriber_count = static_cast<std::uint64_t>(std::exp(7.0 + 1.2 * normal(rng)));
        rec.earliest_post_time = spec.now - rng.range(10 * kSecondsPerDay, 300 * kSecondsPerDay);
        eco.platform->add_entity(std::move(rec), {});
        EntityTruth t;
        t.id = b.id;
        t.handle = b.handle;
        t.is_bot = true;
        t.piracy = true;
        t.bot_category = b.bot_category;
        eco.truth.entities.push_back(std::move(t));
    }
    for (const auto& d : dangling) {
        ChannelRecord rec;
        rec.id = d.id;
        rec.handle = d.handle;
        rec.title = d.handle;
        rec.earliest_post_time = spec.now - rng.range(30 * kSecondsPerDay, 400 * kSecondsPerDay);
        eco.platform->add_entity(std::move(rec), {});
        eco.platform->remove_channel(d.id);
        EntityTruth t;
        t.id = d.id;
        t.handle = d.handle;
        t.piracy = true;
        t.dangling = true;
        eco.truth.entities.push_back(std::move(t));
    }
    std::sort(eco.truth.posts.begin(), eco.truth.posts.end(),
              [](const PostTruth& a, const PostTruth& b) { return a.post < b.post; });
    return eco;
}

std::vector<GeneratedPost> generate_post_corpus(std::uint64_t seed, std::size_t n, double piracy_fraction,
                                                const std::vector<CatalogEntry>& catalog, double covert_rate) {
    Rng rng(seed);
    const auto n_piracy = static_cast<std::size_t>(std::llround(piracy_fraction * static_cast<double>(n)));
    std::vector<bool> piracy(n, false);
    std::fill(piracy.begin(), piracy.begin() + static_cast<std::ptrdiff_t>(n_piracy), true);
    rng.shuffle(piracy);
    HandleFactory handles(rng, {});
    std::vector<GeneratedPost> out;
    for (std::size_t i = 0; i < n; ++i) {
        Draft d;
        if (!piracy[i]) {
            d = benign_post(rng, catalog);
        } else if (rng.chance(covert_rate)) {
            d = covert_piracy(rng, catalog);
        } else if (rng.chance(0.25)) {
            const auto kind = rng.below(4);
            if (kind == 0) {
                std::vector<LinkTarget> many;
                for (int k = 0; k < 4; ++k) many.push_back({LinkKind::channel, handles.linked_handle()});
                d = link_post(rng, many, true, catalog);
            } else if (kind == 1) {
                d = link_post(rng, {{LinkKind::bot, handles.linked_handle("_bot")}}, false, catalog);
            } else if (kind == 2) {
                d = link_post(rng, {{LinkKind::invite, random_code(rng, 12, true)}}, false, catalog);
            } else {
                d = link_post(rng, {{LinkKind::channel, handles.linked_handle()}}, false, catalog);
            }
        } else {
            d = piracy_content(rng, catalog);
        }
        PostRecord p;
        p.channel_id = "corpus";
        p.post_id = static_cast<std::int64_t>(i + 1);
        p.time = 1767225600 + static_cast<Timestamp>(i);
        p.text = d.text;
        p.view_count = static_cast<std::uint64_t>(std::exp(6.0 + normal(rng)));
        p.internal_links = d.structured;
        p.external_links = d.external;
        p.attachment = d.attachment;
        out.push_back({p, PostTruth{key_of(p), d.piracy, d.labels, d.title_id, d.name}});
    }
    return out;
}

// ---- serialization --------------------------------------------------------------

namespace {

Json entity_truth_json(const EntityTruth& t) {
    Json j{{"type", "entity"}, {"id", t.id},       {"handle", t.handle},     {"is_bot", t.is_bot},
           {"piracy", t.piracy}, {"layer", t.layer}, {"planted_role", t.planted_role},
           {"fresh", t.fresh},   {"dangling", t.dangling}, {"invite_only", t.invite_only}};
    if (t.bot_category) j["bot_category"] = to_string(*t.bot_category);
    return j;
}

Json post_truth_json(const PostTruth& t) {
    Json labels = Json::array();
    for (Leaf l : t.labels) labels.push_back(Json{{"group", to_string(group_of(l))}, {"leaf", to_string(l)}});
    Json j{{"type", "post"},        {"channel_id", t.post.channel_id}, {"post_id", t.post.post_id},
           {"is_piracy", t.is_piracy}, {"labels", labels},             {"template", t.template_name}};
    if (t.title_id) j["title_id"] = *t.title_id;
    return j;
}

Leaf leaf_or_throw(const std::string& s) {
    auto l = leaf_from_string(s);
    if (!l) throw InvalidSpec("unknown leaf " + s);
    return *l;
}

} // namespace

void save_ecosystem(const Ecosystem& eco, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto removed = eco.platform->removed_entities();
    const auto removed_posts = eco.platform->removed_posts();
    std::vector<Json> channels, posts, truth;
    for (const auto& c : eco.platform->entities()) {
        Json j = c;
        j["removed"] = removed.count(c.id) > 0;
        channels.push_back(std::move(j));
    }
    for (const auto& p : eco.platform->all_posts()) {
        Json j = p;
        j["removed"] = removed_posts.count(key_of(p)) > 0;
        posts.push_back(std::move(j));
    }
    truth.push_back(Json{{"type", "meta"}, {"now", eco.now}, {"seed", eco.seed}});
    for (const auto& e : eco.truth.entities) truth.push_back(entity_truth_json(e));
    for (const auto& p : eco.truth.posts) truth.push_back(post_truth_json(p));
    for (const auto& e : eco.truth.edges) {
        truth.push_back(Json{{"type", "edge"}, {"src", e.src_id}, {"kind", to_string(e.kind)}, {"target", e.target}});
    }
    write_jsonl(dir / "channels.jsonl", channels);
    write_jsonl(dir / "posts.jsonl", posts);
    write_jsonl(dir / "truth.jsonl", truth);
}

Ecosystem load_ecosystem(const std::filesystem::path& dir) {
    Ecosystem eco;
    eco.platform = std::make_unique<SimulatedPlatform>();
    std::map<std::string, std::vector<PostRecord>> posts;
    std::vector<PostKey> removed_posts;
    for (const auto& j : read_jsonl(dir / "posts.jsonl")) {
        auto p = j.get<PostRecord>();
        if (j.value("removed", false)) removed_posts.push_back(key_of(p));
        posts[p.channel_id].push_back(std::move(p));
    }
    std::vector<std::string> removed;
    for (const auto& j : read_jsonl(dir / "channels.jsonl")) {
        auto c = j.get<ChannelRecord>();
        if (j.value("removed", false)) removed.push_back(c.id);
        auto id = c.id;
        eco.platform->add_entity(std::move(c), std::move(posts[id]));
    }
    for (const auto& id : removed) eco.platform->remove_channel(id);
    for (const auto& k : removed_posts) eco.platform->remove_post(k.channel_id, k.post_id);

    const auto truth_path = dir / "truth.jsonl";
    if (!std::filesystem::exists(truth_path)) return eco;
    for (const auto& j : read_jsonl(truth_path)) {
        const auto type = j.at("type").get<std::string>();
        if (type == "meta") {
            eco.now = j.at("now").get<Timestamp>();
            eco.seed = j.at("seed").get<std::uint64_t>();
        } else if (type == "entity") {
            EntityTruth t;
            t.id = j.at("id").get<std::string>();
            t.handle = j.at("handle").get<std::string>();
            t.is_bot = j.at("is_bot").get<bool>();
            t.piracy = j.at("piracy").get<bool>();
            t.layer = j.at("layer").get<int>();
            t.planted_role = j.at("planted_role").get<std::string>();
            t.fresh = j.at("fresh").get<bool>();
            t.dangling = j.at("dangling").get<bool>();
            t.invite_only = j.value("invite_only", false);
            if (j.contains("bot_category")) t.bot_category = leaf_or_throw(j.at("bot_category").get<std::string>());
            eco.truth.entities.push_back(std::move(t));
        } else if (type == "post") {
            PostTruth t;
            t.post = {j.at("channel_id").get<std::string>(), j.at("post_id").get<std::int64_t>()};
            t.is_piracy = j.at("is_piracy").get<bool>();
            for (const auto& l : j.at("labels")) t.labels.push_back(leaf_or_throw(l.at("leaf").get<std::string>()));
            if (j.contains("title_id")) t.title_id = j.at("title_id").get<std::string>();
            t.template_name = j.value("template", std::string());
            eco.truth.posts.push_back(std::move(t));
        } else if (type == "edge") {
            eco.truth.edges.push_back({j.at("src").get<std::string>(),
                                       link_kind_from_string(j.at("kind").get<std::string>()),
                                       j.at("target").get<std::string>()});
        }
    }
    std::sort(eco.truth.posts.begin(), eco.truth.posts.end(),
              [](const PostTruth& a, const PostTruth& b) { return a.post < b.post; });
    return eco;
}

std::vector<std::string> script_takedowns(SimulatedPlatform& platform, std::vector<std::string> entity_ids,
                                          double fraction, std::uint64_t seed) {
    std::sort(entity_ids.begin(), entity_ids.end());
    entity_ids.erase(std::unique(entity_ids.begin(), entity_ids.end()), entity_ids.end());
    Rng rng(seed);
    rng.shuffle(entity_ids);
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(entity_ids.size())));
    entity_ids.resize(std::min(k, entity_ids.size()));
    for (const auto& id : entity_ids) platform.remove_channel(id);
    std::sort(entity_ids.begin(), entity_ids.end());
    return entity_ids;
}

} // namespace antirip
