#include "antirip/links.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "antirip/handle_synthesis.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

std::string_view take_word(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && word_char(s[n])) ++n;
    return s.substr(0, n);
}

std::string_view take_invite(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && (word_char(s[n]) || s[n] == '-')) ++n;
    return s.substr(0, n);
}

InternalLink classify_handle(std::string_view handle) {
    std::string h = text::to_lower(handle);
    return {looks_like_bot_handle(h) ? LinkKind::bot : LinkKind::channel, std::move(h)};
}

// Parses what follows "t.me/". Returns false if the reference is malformed.
bool parse_tme_path(std::string_view rest, std::set<InternalLink>& out) {
    if (!rest.empty() && rest[0] == '+') {
        auto inv = take_invite(rest.substr(1));
        if (inv.empty()) return false;
        out.insert({LinkKind::invite, std::string(inv)});
        return true;
    }
    if (rest.starts_with("joinchat/")) {
        auto inv = take_invite(rest.substr(9));
        if (inv.empty()) return false;
        out.insert({LinkKind::invite, std::string(inv)});
        return true;
    }
    if (rest.starts_with("s/")) rest.remove_prefix(2);
    auto handle = take_word(rest);
    if (!handle_ok(handle)) return false;
    out.insert(classify_handle(handle));
    return true;
}

} // namespace

bool looks_like_bot_handle(std::string_view handle) {
    return handle.size() >= 3 && text::to_lower(handle.substr(handle.size() - 3)) == "bot";
}

ExtractedLinks extract_links_from_text(std::string_view text, const LinkExtractionOptions& opts) {
    std::set<InternalLink> found;
    ExtractedLinks out;
    const std::string lower = text::to_lower(text);
    for (std::size_t pos = 0; (pos = lower.find("t.me/", pos)) != std::string::npos;) {
        // "t.me/" must not be the tail of a longer host such as "at.me/".
        const bool bounded = pos == 0 || !(std::isalnum(static_cast<unsigned char>(lower[pos - 1])) ||
                                           lower[pos - 1] == '.' || lower[pos - 1] == '-');
        pos += 5;
        if (!bounded) continue;
        if (!parse_tme_path(std::string_view(text).substr(pos), found)) ++out.malformed;
    }
    if (opts.parse_mentions) {
        for (std::size_t pos = 0; (pos = text.find('@', pos)) != std::string_view::npos; ++pos) {
            // Skip e-mail addresses and "user@host" forms.
            if (pos > 0 && word_char(text[pos - 1])) continue;
            auto handle = take_word(text.substr(pos + 1));
            if (handle.empty()) continue;
            // A mention followed by a domain is part of an address, not a handle.
            const std::size_t after = pos + 1 + handle.size();
            if (after < text.size() && text[after] == '.' && after + 1 < text.size() &&
                std::isalnum(static_cast<unsigned char>(text[after + 1]))) {
                continue;
            }
            if (handle_ok(handle)) found.insert(classify_handle(handle));
        }
    }
    out.links.assign(found.begin(), found.end());
    return out;
}

ExtractedLinks extract_internal_links(const std::vector<PostRecord>& posts,
                                      const LinkExtractionOptions& opts) {
    std::set<InternalLink> found;
    ExtractedLinks out;
    for (const auto& p : posts) {
        auto from_text = extract_links_from_text(p.text, opts);
        out.malformed += from_text.malformed;
        found.insert(from_text.links.begin(), from_text.links.end());
        for (const auto& l : p.internal_links) {
            if (l.kind == LinkKind::invite) {
                if (!l.target.empty()) found.insert(l);
            } else if (handle_ok(l.target)) {
                found.insert({l.kind, text::to_lower(l.target)});
            } else {
                ++out.malformed;
            }
        }
        for (const auto& url : p.external_links) {
            const auto host = text::url_host(url);
            if (host != "t.me" && host != "telegram.me") continue;
            auto slash = url.find(host);
            auto path_start = url.find('/', slash == std::string::npos ? 0 : slash + host.size());
            if (path_start == std::string::npos ||
                !parse_tme_path(std::string_view(url).substr(path_start + 1), found)) {
                ++out.malformed;
            }
        }
    }
    out.links.assign(found.begin(), found.end());
    return out;
}

} // namespace antirip
