#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "antirip/types.hpp"

namespace antirip {

using Json = nlohmann::json;

void to_json(Json& j, const InternalLink& l);
void from_json(const Json& j, InternalLink& l);
void to_json(Json& j, const Attachment& a);
void from_json(const Json& j, Attachment& a);
void to_json(Json& j, const ChannelRecord& c);
void from_json(const Json& j, ChannelRecord& c);
void to_json(Json& j, const PostRecord& p);
void from_json(const Json& j, PostRecord& p);

/// Reads a JSON Lines file. Blank lines and lines carrying a `_header` key are skipped.
/// Throws ParseError with the 1-based line number on malformed input.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

std::string jsonl_text(const std::vector<Json>& rows, const Json& header = Json());

/// Writes one compact JSON document per line; `header`, when not null, goes first.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows,
                 const Json& header = Json());

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// One entry per non-empty line, surrounding whitespace trimmed, `#` comments dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

} // namespace antirip
