#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace antirip {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyLexicon : public Error {
public:
    EmptyLexicon() : Error("seed lexicon has no terms") {}
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Platform asked the caller to back off.
class RateLimited : public Error {
public:
    using Error::Error;
};

class TransportFailure : public Error {
public:
    using Error::Error;
};

/// Retry budget exhausted on a transport failure or a rate limit.
class TransportExhausted : public Error {
public:
    using Error::Error;
};

/// The channel existed once but has been removed from the platform.
class ChannelGone : public Error {
public:
    explicit ChannelGone(const std::string& id) : Error("channel gone: " + id), channel_id(id) {}
    std::string channel_id;
};

class NoLabelMatch : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

class EmptyGraph : public Error {
public:
    EmptyGraph() : Error("graph has no channel nodes") {}
};

class MissingFxRate : public Error {
public:
    explicit MissingFxRate(const std::string& currency)
        : Error("no exchange rate for " + currency), currency(currency) {}
    std::string currency;
};

class NoEvidence : public Error {
public:
    using Error::Error;
};

/// A pipeline stage was started without the artifact it consumes.
class MissingInput : public Error {
public:
    using Error::Error;
};

} // namespace antirip
