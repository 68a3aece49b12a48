#include "antirip/adapters.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <httplib.h>

#include "antirip/errors.hpp"
#include "antirip/serialize.hpp"

namespace antirip {

Json classifier_request(const std::string& op, const PostRecord& post, const PostContext& ctx) {
    return Json{{"op", op}, {"post", post}, {"context", Json{{"author_is_bot", ctx.author_is_bot}}}};
}

PostVerdict verdict_from_response(const PostRecord& post, const Json& response) {
    if (!response.is_object() || !response.contains("is_piracy") || !response["is_piracy"].is_boolean()) {
        throw InvalidSpec("classifier response lacks a boolean is_piracy");
    }
    PostVerdict v{key_of(post), response["is_piracy"].get<bool>(), {}};
    try {
        for (const auto& l : response.value("labels", Json::array())) v.labels.push_back(l.get<LabelAssignment>());
    } catch (const Json::exception& e) {
        throw InvalidSpec(std::string("bad label in classifier response: ") + e.what());
    }
    if (!verdict_well_formed(v)) throw InvalidSpec("classifier returned a malformed verdict");
    return v;
}

// ---- subprocess ------------------------------------------------------------------

SubprocessClassifier::SubprocessClassifier(std::vector<std::string> argv, std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
    if (argv_.empty()) throw InvalidConfig("classifier command is empty");
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw TransportFailure(std::string("socketpair: ") + std::strerror(errno));
    }
    // The child reports a failed exec through this pipe.
    int status_pipe[2];
    if (::pipe(status_pipe) != 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw TransportFailure(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        ::close(status_pipe[0]);
        ::close(status_pipe[1]);
        throw TransportFailure(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::close(fds[0]);
        ::close(status_pipe[0]);
        ::fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[1]);
        std::vector<char*> args;
        for (auto& a : argv_) args.push_back(a.data());
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        const int err = errno;
        [[maybe_unused]] auto n = ::write(status_pipe[1], &err, sizeof err);
        ::_exit(127);
    }
    ::close(fds[1]);
    ::close(status_pipe[1]);
    int err = 0;
    const auto n = ::read(status_pipe[0], &err, sizeof err);
    ::close(status_pipe[0]);
    pid_ = pid;
    to_child_ = from_child_ = fds[0];
    if (n == static_cast<ssize_t>(sizeof err)) {
        stop();
        throw TransportFailure("cannot start " + argv_[0] + ": " + std::strerror(err));
    }
}

SubprocessClassifier::~SubprocessClassifier() { stop(); }

void SubprocessClassifier::stop() {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = from_child_ = -1;
    }
    if (pid_ > 0) {
        ::kill(pid_, SIGTERM);
        ::waitpid(pid_, nullptr, 0);
        pid_ = -1;
    }
}

Json SubprocessClassifier::call(const Json& request) {
    if (to_child_ < 0) throw TransportFailure("classifier process is not running");
    const std::string line = request.dump() + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
        const auto n = ::send(to_child_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            stop();
            throw TransportFailure(std::string("classifier write: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            const auto reply = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            try {
                return Json::parse(reply);
            } catch (const Json::exception& e) {
                throw InvalidSpec(std::string("classifier reply is not JSON: ") + e.what());
            }
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            stop();
            throw TransportFailure("classifier timed out");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int r = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (r < 0 && errno == EINTR) continue;
        if (r <= 0) continue;
        char chunk[4096];
        const auto n = ::recv(from_child_, chunk, sizeof chunk, 0);
        if (n <= 0) {
            stop();
            throw TransportFailure("classifier process closed its output");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

bool SubprocessClassifier::detect(const PostRecord& post, const PostContext& ctx) {
    return verdict_from_response(post, call(classifier_request("detect", post, ctx))).is_piracy;
}

PostVerdict SubprocessClassifier::categorize(const PostRecord& post, const PostContext& ctx) {
    auto v = verdict_from_response(post, call(classifier_request("categorize", post, ctx)));
    if (v.labels.empty()) throw NoLabelMatch("external classifier assigned no label");
    v.is_piracy = true;
    return v;
}

// ---- http ------------------------------------------------------------------------

HttpClassifier::HttpClassifier(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (base_url_.rfind("http://", 0) != 0) throw InvalidConfig("classifier URL must start with http://");
}

Json HttpClassifier::call(const Json& request) {
    httplib::Client client(base_url_);
    const auto secs = static_cast<time_t>(timeout_.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout_.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post("/classify", request.dump(), "application/json");
    if (!res) throw TransportFailure("classifier HTTP error: " + httplib::to_string(res.error()));
    if (res->status == 429) throw RateLimited("classifier rate limited");
    if (res->status != 200) throw TransportFailure("classifier HTTP status " + std::to_string(res->status));
    try {
        return Json::parse(res->body);
    } catch (const Json::exception& e) {
        throw InvalidSpec(std::string("classifier reply is not JSON: ") + e.what());
    }
}

bool HttpClassifier::detect(const PostRecord& post, const PostContext& ctx) {
    return verdict_from_response(post, call(classifier_request("detect", post, ctx))).is_piracy;
}

PostVerdict HttpClassifier::categorize(const PostRecord& post, const PostContext& ctx) {
    auto v = verdict_from_response(post, call(classifier_request("categorize", post, ctx)));
    if (v.labels.empty()) throw NoLabelMatch("external classifier assigned no label");
    v.is_piracy = true;
    return v;
}

// ---- fallback --------------------------------------------------------------------

FallbackClassifier::FallbackClassifier(std::unique_ptr<ClassifierAdapter> primary,
                                       std::unique_ptr<ClassifierAdapter> fallback)
    : primary_(std::move(primary)), fallback_(std::move(fallback)) {}

bool FallbackClassifier::detect(const PostRecord& post, const PostContext& ctx) {
    if (!primary_down_) {
        try {
            return primary_->detect(post, ctx);
        } catch (const TransportFailure& e) {
            primary_down_ = true;
            last_error_ = e.what();
        } catch (const RateLimited& e) {
            last_error_ = e.what();
        } catch (const InvalidSpec& e) {
            last_error_ = e.what();
        }
    }
    ++fallbacks_;
    return fallback_->detect(post, ctx);
}

PostVerdict FallbackClassifier::categorize(const PostRecord& post, const PostContext& ctx) {
    if (!primary_down_) {
        try {
            return primary_->categorize(post, ctx);
        } catch (const TransportFailure& e) {
            primary_down_ = true;
            last_error_ = e.what();
        } catch (const RateLimited& e) {
            last_error_ = e.what();
        } catch (const InvalidSpec& e) {
            last_error_ = e.what();
        }
    }
    ++fallbacks_;
    return fallback_->categorize(post, ctx);
}

} // namespace antirip
