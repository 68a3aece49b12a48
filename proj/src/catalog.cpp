#include "antirip/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>

#include "antirip/errors.hpp"
#include "antirip/json_io.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace {

std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (const auto& t : toks) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

bool is_year_token(const std::string& t) {
    return t.size() == 4 && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
           (t[0] == '1' || t[0] == '2');
}

bool is_quality_token(const std::string& t) {
    static const std::set<std::string> q{"480p", "720p",  "1080p",  "2160p", "4k",    "hdrip",
                                         "webrip", "webdl", "bluray", "hevc", "x264", "x265"};
    return q.count(t) > 0;
}

// Country words that may sit next to a title to pick a regional version.
std::optional<std::string> country_of_token(const std::string& t) {
    static const std::map<std::string, std::string> m{
        {"us", "US"},  {"usa", "US"}, {"american", "US"}, {"uk", "GB"},  {"gb", "GB"},
        {"british", "GB"}, {"india", "IN"}, {"indian", "IN"}, {"kr", "KR"},
        {"korean", "KR"}, {"jp", "JP"}, {"japanese", "JP"}, {"fr", "FR"}, {"french", "FR"},
        {"es", "ES"}, {"spanish", "ES"}, {"de", "DE"}, {"german", "DE"}, {"au", "AU"},
        {"ca", "CA"}, {"ir", "IR"}, {"cn", "CN"}, {"chinese", "CN"}, {"tr", "TR"}, {"turkish", "TR"}};
    auto it = m.find(t);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

struct Candidate {
    std::size_t entry;
    std::size_t span_begin;
    std::size_t span_end;
    double ratio;
    std::string name_key;
    std::vector<std::pair<std::string, std::string>> pairs;
};

CatalogEntry entry_from_json(const Json& j, std::size_t line) {
    CatalogEntry e;
    e.id = j.contains("id") ? j.at("id").get<std::string>() : "t" + std::to_string(line);
    e.title = j.at("title").get<std::string>();
    e.alt_titles = j.value("alt_titles", std::vector<std::string>{});
    e.year = j.at("year").get<int>();
    e.kind = media_kind_from_string(j.value("kind", std::string("movie")));
    e.companies = j.value("companies", std::vector<std::string>{});
    e.countries = j.value("countries", std::vector<std::string>{});
    for (auto& c : e.countries) {
        std::transform(c.begin(), c.end(), c.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    }
    if (text::tokenize(e.title).empty()) throw std::invalid_argument("empty title");
    return e;
}

} // namespace

std::string_view to_string(MediaKind k) { return k == MediaKind::movie ? "movie" : "tv"; }

MediaKind media_kind_from_string(std::string_view s) {
    if (s == "movie") return MediaKind::movie;
    if (s == "tv") return MediaKind::tv;
    throw std::invalid_argument("unknown media kind: " + std::string(s));
}

bool Stoplist::blocks(std::string_view title) const {
    return phrases.count(join_tokens(text::tokenize(title))) > 0;
}

Stoplist Stoplist::load(const std::filesystem::path& path) {
    Stoplist s;
    for (const auto& line : read_lines(path)) s.phrases.insert(join_tokens(text::tokenize(line)));
    return s;
}

Catalog Catalog::from_entries(std::vector<CatalogEntry> entries, const Stoplist& stoplist) {
    Catalog c;
    for (auto& e : entries) {
        ++c.stats_.read;
        if (e.year < kCatalogMinYear) {
            ++c.stats_.too_old;
            continue;
        }
        if (stoplist.blocks(e.title)) {
            ++c.stats_.stoplisted;
            continue;
        }
        if (c.by_id_.count(e.id)) throw InvalidSpec("duplicate catalog id " + e.id);
        const std::size_t idx = c.entries_.size();
        std::vector<std::vector<std::string>> names;
        auto add_name = [&](const std::string& n) {
            auto toks = text::tokenize(n);
            if (toks.empty() || std::find(names.begin(), names.end(), toks) != names.end()) return;
            names.push_back(std::move(toks));
        };
        add_name(e.title);
        for (const auto& alt : e.alt_titles) {
            if (!stoplist.blocks(alt)) add_name(alt);
        }
        for (const auto& n : names) {
            for (const auto& t : n) {
                auto& list = c.index_[t];
                if (list.empty() || list.back() != idx) list.push_back(idx);
            }
        }
        c.by_id_.emplace(e.id, idx);
        c.names_.push_back(std::move(names));
        c.entries_.push_back(std::move(e));
    }
    return c;
}

const CatalogEntry* Catalog::find(std::string_view id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const std::vector<std::size_t>* Catalog::postings(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? nullptr : &it->second;
}

Catalog ingest_catalog(const std::filesystem::path& path, const Stoplist& stoplist) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open " + path.string());
    std::vector<CatalogEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = Json::parse(line);
            if (j.contains("_header")) continue;
            entries.push_back(entry_from_json(j, lineno));
        } catch (const std::exception& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
    }
    return Catalog::from_entries(std::move(entries), stoplist);
}

std::vector<TitleMatch> match(const PostRecord& post, const Catalog& catalog,
                              const MatchOptions& opts) {
    const auto tokens = text::tokenize(post.text);
    std::vector<TitleMatch> out;
    if (tokens.empty()) return out;

    std::set<std::size_t> pool;
    for (const auto& t : tokens) {
        if (const auto* p = catalog.postings(t)) pool.insert(p->begin(), p->end());
    }

    bool year_present = false;
    bool quality_present = false;
    std::set<int> years;
    for (const auto& t : tokens) {
        if (is_year_token(t)) years.insert(std::stoi(t));
        quality_present = quality_present || is_quality_token(t);
    }

    auto token_match = [&](const std::string& post_tok, const std::string& title_tok, bool fuzzy) {
        if (post_tok == title_tok) return true;
        return fuzzy && title_tok.size() >= opts.fuzzy_min_length &&
               text::bounded_edit_distance(post_tok, title_tok, 1) <= 1;
    };

    std::vector<Candidate> cands;
    for (std::size_t e : pool) {
        std::optional<Candidate> best;
        const auto& entry = catalog.entries()[e];
        year_present = years.count(entry.year) > 0;
        for (const auto& name : catalog.names(e)) {
            const std::size_t n = name.size();
            if (n > tokens.size()) continue;
            const bool fuzzy = n >= 2;
            for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
                std::vector<std::pair<std::string, std::string>> pairs;
                for (std::size_t j = 0; j < n; ++j) {
                    if (token_match(tokens[i + j], name[j], fuzzy)) pairs.emplace_back(tokens[i + j], name[j]);
                }
                // At least one token must align exactly.
                const bool anchored = std::any_of(pairs.begin(), pairs.end(),
                                                  [](const auto& p) { return p.first == p.second; });
                if (!anchored) continue;
                const double ratio = static_cast<double>(pairs.size()) / static_cast<double>(n);
                const double bonus = (year_present ? 0.5 : 0.0) + (quality_present ? 0.25 : 0.0);
                const double conf = std::min(1.0, ratio + (1.0 - ratio) * bonus);
                if (conf < opts.threshold) continue;
                if (!best || conf > best->ratio || (conf == best->ratio && n > best->span_end - best->span_begin)) {
                    best = Candidate{e, i, i + n, conf, join_tokens(name), std::move(pairs)};
                }
            }
        }
        if (best) cands.push_back(std::move(*best));
    }

    // A match whose span sits strictly inside a longer match's span is a shorter title
    // embedded in the longer one ("The Dark Knight" inside "The Dark Knight Rises").
    std::vector<Candidate> kept;
    for (const auto& c : cands) {
        const bool shadowed = std::any_of(cands.begin(), cands.end(), [&](const Candidate& o) {
            return o.span_begin <= c.span_begin && c.span_end <= o.span_end &&
                   (o.span_end - o.span_begin) > (c.span_end - c.span_begin);
        });
        if (!shadowed) kept.push_back(c);
    }

    // Entries sharing a name and a span are the same title from different productions.
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<std::size_t>> ties;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        ties[{kept[i].name_key, kept[i].span_begin, kept[i].span_end}].push_back(i);
    }
    for (const auto& [key, members] : ties) {
        const auto& [name, begin, end] = key;
        std::vector<std::size_t> chosen;
        if (members.size() > 1) {
            // Disambiguators: the release year anywhere, a country word or a company next to the span.
            std::set<std::string> near;
            const std::size_t lo = begin >= 2 ? begin - 2 : 0;
            const std::size_t hi = std::min(tokens.size(), end + 2);
            for (std::size_t i = lo; i < hi; ++i) {
                if (i < begin || i >= end) near.insert(tokens[i]);
            }
            for (std::size_t m : members) {
                const auto& entry = catalog.entries()[kept[m].entry];
                bool hit = years.count(entry.year) > 0;
                for (const auto& t : near) {
                    if (auto c = country_of_token(t)) {
                        hit = hit || std::find(entry.countries.begin(), entry.countries.end(), *c) != entry.countries.end();
                    }
                }
                for (const auto& company : entry.companies) {
                    const auto ctoks = text::tokenize(company);
                    hit = hit || (!ctoks.empty() && std::all_of(ctoks.begin(), ctoks.end(),
                                                               [&](const auto& t) { return near.count(t) > 0; }));
                }
                if (hit) chosen.push_back(m);
            }
        }
        if (chosen.empty()) chosen = members;
        for (std::size_t m : chosen) {
            const auto& c = kept[m];
            out.push_back(TitleMatch{catalog.entries()[c.entry].id, key_of(post), c.ratio,
                                     chosen.size() > 1, c.pairs});
        }
    }

    std::sort(out.begin(), out.end(), [](const TitleMatch& a, const TitleMatch& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.entry_id < b.entry_id;
    });
    return out;
}

} // namespace antirip
