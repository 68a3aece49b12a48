#include "antirip/hash.hpp"
#include "antirip/types.hpp"

#include <cstdio>
#include <stdexcept>

namespace antirip {

std::string to_string(LinkKind kind) {
    switch (kind) {
    case LinkKind::channel: return "channel";
    case LinkKind::bot: return "bot";
    case LinkKind::invite: return "invite";
    }
    return "channel";
}

LinkKind link_kind_from_string(const std::string& s) {
    if (s == "channel") return LinkKind::channel;
    if (s == "bot") return LinkKind::bot;
    if (s == "invite") return LinkKind::invite;
    throw std::invalid_argument("unknown link kind: " + s);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace antirip
