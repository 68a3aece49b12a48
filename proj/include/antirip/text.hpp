#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace antirip::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Lowercased runs of ASCII letters and digits; everything else separates.
std::vector<std::string> tokenize(std::string_view s);

/// Levenshtein distance, cut off early once it exceeds `bound` (returns bound + 1 then).
std::size_t bounded_edit_distance(std::string_view a, std::string_view b, std::size_t bound);

/// Host part of an http(s) URL, lowercased, without port or a leading "www.".
std::string url_host(std::string_view url);

/// True if `host` is `domain` or a subdomain of it.
bool host_matches(std::string_view host, std::string_view domain);

bool contains(std::string_view haystack, std::string_view needle);

/// Directory-safe slug: lowercase alnum with single underscores.
std::string slug(std::string_view s);

} // namespace antirip::text
