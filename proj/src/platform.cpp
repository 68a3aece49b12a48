#include "antirip/platform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "antirip/errors.hpp"
#include "antirip/handle_synthesis.hpp"

namespace antirip {

std::optional<ChannelRecord> resolve_handle(PlatformClient& client, std::string_view handle) {
    if (!handle_ok(handle)) throw std::invalid_argument("not a public handle: " + std::string(handle));
    return client.resolve_handle(handle);
}

std::vector<PostRecord> fetch_posts(PlatformClient& client, const std::string& channel_id,
                                    std::size_t limit) {
    if (limit == 0) throw std::invalid_argument("fetch_posts limit must be >= 1");
    auto posts = client.fetch_posts(channel_id, limit);
    if (posts.size() > limit) posts.resize(limit);
    return posts;
}

std::chrono::milliseconds BackoffPolicy::delay(std::size_t attempt) const {
    const double ms = static_cast<double>(base.count()) * std::pow(factor, static_cast<double>(attempt));
    return std::chrono::milliseconds(
        static_cast<std::int64_t>(std::min(ms, static_cast<double>(cap.count()))));
}

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

RetryingClient::RetryingClient(PlatformClient& inner, BackoffPolicy policy, Sleeper sleeper)
    : inner_(inner), policy_(policy), sleeper_(std::move(sleeper)) {}

template <typename F>
auto RetryingClient::with_retry(const char* what, F&& f) -> decltype(f()) {
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return f();
        } catch (const RateLimited& e) {
            if (attempt >= policy_.max_retries) {
                throw TransportExhausted(std::string(what) + ": rate limited after " +
                                         std::to_string(attempt + 1) + " attempts");
            }
        } catch (const TransportFailure& e) {
            if (attempt >= policy_.max_retries) {
                throw TransportExhausted(std::string(what) + ": " + e.what());
            }
        }
        sleeper_(policy_.delay(attempt));
    }
}

std::optional<ChannelRecord> RetryingClient::resolve_handle(std::string_view handle) {
    return with_retry("resolve_handle", [&] { return inner_.resolve_handle(handle); });
}

std::vector<PostRecord> RetryingClient::fetch_posts(const std::string& channel_id, std::size_t limit) {
    return with_retry("fetch_posts", [&] { return inner_.fetch_posts(channel_id, limit); });
}

std::optional<ChannelRecord> RetryingClient::channel_meta(const std::string& channel_id) {
    return with_retry("channel_meta", [&] { return inner_.channel_meta(channel_id); });
}

} // namespace antirip
