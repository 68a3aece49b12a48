#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace antirip {

/// UTC seconds.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

/// Largest single upload the platform accepts (2 GiB).
inline constexpr std::uint64_t kMaxAttachmentBytes = 2147483648ULL;

enum class LinkKind { channel, bot, invite };

struct InternalLink {
    LinkKind kind = LinkKind::channel;
    std::string target;

    friend bool operator==(const InternalLink&, const InternalLink&) = default;
    friend auto operator<=>(const InternalLink&, const InternalLink&) = default;
};

struct Attachment {
    std::string file_name;
    std::uint64_t size_bytes = 0;

    friend bool operator==(const Attachment&, const Attachment&) = default;
};

/// A channel or a bot as the platform reports it.
struct ChannelRecord {
    std::string id;
    std::optional<std::string> handle;
    std::string title;
    std::uint64_t subscriber_count = 0;
    Timestamp earliest_post_time = 0;
    bool is_bot = false;

    friend bool operator==(const ChannelRecord&, const ChannelRecord&) = default;
};

using BotRecord = ChannelRecord;

struct PostRecord {
    std::string channel_id;
    std::int64_t post_id = 0;
    Timestamp time = 0;
    std::string text;
    std::uint64_t view_count = 0;
    std::vector<InternalLink> internal_links;
    std::vector<std::string> external_links;
    std::optional<Attachment> attachment;
    std::optional<std::string> language_tag;
    std::optional<std::string> screenshot_ref;

    friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

/// (channel_id, post_id)
struct PostKey {
    std::string channel_id;
    std::int64_t post_id = 0;

    friend bool operator==(const PostKey&, const PostKey&) = default;
    friend auto operator<=>(const PostKey&, const PostKey&) = default;
};

inline PostKey key_of(const PostRecord& p) { return {p.channel_id, p.post_id}; }

std::string to_string(LinkKind kind);
LinkKind link_kind_from_string(const std::string& s);

} // namespace antirip
