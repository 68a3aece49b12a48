#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "antirip/types.hpp"

namespace antirip {

/// Narrow read-only view of the messaging platform.
///
/// Implementations must tolerate concurrent calls. Any call may throw RateLimited or
/// TransportFailure; fetch_posts and channel_meta throw ChannelGone for removed channels.
class PlatformClient {
public:
    virtual ~PlatformClient() = default;

    /// The public channel or bot registered under `handle`, if any.
    virtual std::optional<ChannelRecord> resolve_handle(std::string_view handle) = 0;

    /// Newest first, at most `limit` posts.
    virtual std::vector<PostRecord> fetch_posts(const std::string& channel_id, std::size_t limit) = 0;

    /// Metadata of a known entity, absent if the id was never seen.
    virtual std::optional<ChannelRecord> channel_meta(const std::string& channel_id) = 0;
};

/// Checks handle_ok before asking the platform. Throws std::invalid_argument otherwise.
std::optional<ChannelRecord> resolve_handle(PlatformClient& client, std::string_view handle);

/// Checks limit >= 1 and the newest-first, at-most-limit contract on the way back.
std::vector<PostRecord> fetch_posts(PlatformClient& client, const std::string& channel_id,
                                    std::size_t limit);

/// Exponential backoff: base 1 s, factor 2, capped at 60 s.
struct BackoffPolicy {
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    std::chrono::milliseconds cap{60000};
    /// Retries after the first attempt before giving up.
    std::size_t max_retries = 6;

    /// Delay before retry number `attempt` (0-based).
    std::chrono::milliseconds delay(std::size_t attempt) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

Sleeper real_sleeper();

/// Decorator that retries RateLimited and TransportFailure with backoff and throws
/// TransportExhausted once the retry budget is spent. ChannelGone passes through.
class RetryingClient final : public PlatformClient {
public:
    RetryingClient(PlatformClient& inner, BackoffPolicy policy, Sleeper sleeper);

    std::optional<ChannelRecord> resolve_handle(std::string_view handle) override;
    std::vector<PostRecord> fetch_posts(const std::string& channel_id, std::size_t limit) override;
    std::optional<ChannelRecord> channel_meta(const std::string& channel_id) override;

private:
    template <typename F>
    auto with_retry(const char* what, F&& f) -> decltype(f());

    PlatformClient& inner_;
    BackoffPolicy policy_;
    Sleeper sleeper_;
};

} // namespace antirip
