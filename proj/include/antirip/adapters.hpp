#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "antirip/json_io.hpp"
#include "antirip/taxonomy.hpp"

namespace antirip {

/// Wire request for an external classifier: {"op": "detect"|"categorize", "post": {...}, "context": {...}}.
Json classifier_request(const std::string& op, const PostRecord& post, const PostContext& ctx);

/// Reads {"is_piracy": bool, "labels": [{"leaf", "justification"}]}. Throws InvalidSpec.
PostVerdict verdict_from_response(const PostRecord& post, const Json& response);

/// Talks line-delimited JSON to a long-running child process over stdin/stdout.
class SubprocessClassifier final : public ClassifierAdapter {
public:
    /// argv[0] is resolved through PATH. Throws TransportFailure if the process cannot start.
    explicit SubprocessClassifier(std::vector<std::string> argv,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~SubprocessClassifier() override;
    SubprocessClassifier(const SubprocessClassifier&) = delete;
    SubprocessClassifier& operator=(const SubprocessClassifier&) = delete;

    bool detect(const PostRecord& post, const PostContext& ctx) override;
    PostVerdict categorize(const PostRecord& post, const PostContext& ctx) override;

private:
    Json call(const Json& request);
    void stop();

    std::vector<std::string> argv_;
    std::chrono::milliseconds timeout_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// POSTs the same request document to <base_url>/classify.
class HttpClassifier final : public ClassifierAdapter {
public:
    explicit HttpClassifier(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30));

    bool detect(const PostRecord& post, const PostContext& ctx) override;
    PostVerdict categorize(const PostRecord& post, const PostContext& ctx) override;

private:
    Json call(const Json& request);

    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

/// Uses `primary` and drops to `fallback` for any call that fails in transport or format.
class FallbackClassifier final : public ClassifierAdapter {
public:
    FallbackClassifier(std::unique_ptr<ClassifierAdapter> primary, std::unique_ptr<ClassifierAdapter> fallback);

    bool detect(const PostRecord& post, const PostContext& ctx) override;
    PostVerdict categorize(const PostRecord& post, const PostContext& ctx) override;

    std::size_t fallbacks() const { return fallbacks_; }
    const std::string& last_error() const { return last_error_; }

private:
    std::unique_ptr<ClassifierAdapter> primary_;
    std::unique_ptr<ClassifierAdapter> fallback_;
    bool primary_down_ = false;
    std::size_t fallbacks_ = 0;
    std::string last_error_;
};

} // namespace antirip
