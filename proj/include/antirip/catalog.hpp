#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "antirip/types.hpp"

namespace antirip {

enum class MediaKind { movie, tv };

std::string_view to_string(MediaKind k);
MediaKind media_kind_from_string(std::string_view s);

struct CatalogEntry {
    std::string id;
    std::string title;
    std::vector<std::string> alt_titles;
    int year = 0;
    MediaKind kind = MediaKind::movie;
    std::vector<std::string> companies;
    /// ISO-3166 alpha-2, upper case.
    std::vector<std::string> countries;
};

inline constexpr int kCatalogMinYear = 1980;

/// Normalized whole titles that are too generic to match on.
struct Stoplist {
    std::set<std::string> phrases;

    bool blocks(std::string_view title) const;
    static Stoplist load(const std::filesystem::path& path);
};

struct IngestStats {
    std::size_t read = 0;
    std::size_t too_old = 0;
    std::size_t stoplisted = 0;
};

/// Immutable title catalog with a token index.
class Catalog {
public:
    Catalog() = default;

    /// Applies the ingest filter (year and stoplist) and builds the index.
    static Catalog from_entries(std::vector<CatalogEntry> entries, const Stoplist& stoplist);

    const std::vector<CatalogEntry>& entries() const { return entries_; }
    const CatalogEntry* find(std::string_view id) const;
    const IngestStats& stats() const { return stats_; }

    /// Tokenized title and alternative titles of entry i.
    const std::vector<std::vector<std::string>>& names(std::size_t i) const { return names_[i]; }
    /// Entries that have `token` in one of their names.
    const std::vector<std::size_t>* postings(const std::string& token) const;

private:
    std::vector<CatalogEntry> entries_;
    std::vector<std::vector<std::vector<std::string>>> names_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> index_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
    IngestStats stats_;
};

/// Reads a JSON Lines catalog. Throws ParseError (with line number) on bad rows.
/// Rows without an "id" get "t<line>".
Catalog ingest_catalog(const std::filesystem::path& path, const Stoplist& stoplist);

struct MatchOptions {
    /// Minimum confidence for a match.
    double threshold = 0.8;
    /// Fuzzy (edit distance 1) token matches need at least this many characters.
    std::size_t fuzzy_min_length = 4;
};

struct TitleMatch {
    std::string entry_id;
    PostKey post;
    double confidence = 0;
    bool ambiguous = false;
    /// (post token, title token) pairs that were aligned.
    std::vector<std::pair<std::string, std::string>> matched_tokens;
};

/// Catalog titles mentioned by the post, ordered by (confidence desc, entry id).
std::vector<TitleMatch> match(const PostRecord& post, const Catalog& catalog,
                              const MatchOptions& opts = {});

} // namespace antirip
