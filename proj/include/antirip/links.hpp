#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "antirip/types.hpp"

namespace antirip {

struct LinkExtractionOptions {
    /// Also treat bare @handle mentions as channel references.
    bool parse_mentions = true;
};

struct ExtractedLinks {
    /// Sorted, deduplicated. Targets are lowercased handles (invite hashes keep their case).
    std::vector<InternalLink> links;
    std::size_t malformed = 0;
};

/// Platform rule: bot usernames end in "bot".
bool looks_like_bot_handle(std::string_view handle);

/// Parses t.me/<handle>, t.me/s/<handle>, t.me/+<invite>, t.me/joinchat/<invite> and
/// @<handle> out of free text. Malformed t.me references are counted, not returned.
ExtractedLinks extract_links_from_text(std::string_view text,
                                       const LinkExtractionOptions& opts = {});

/// Text links plus the structured internal_links of every post, deduplicated.
ExtractedLinks extract_internal_links(const std::vector<PostRecord>& posts,
                                      const LinkExtractionOptions& opts = {});

} // namespace antirip
