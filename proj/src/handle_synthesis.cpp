#include "antirip/handle_synthesis.hpp"

#include <algorithm>
#include <cctype>

#include "antirip/errors.hpp"
#include "antirip/json_io.hpp"
#include "antirip/rng.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace {

std::vector<std::string> nonempty_fragments(std::string_view handle) {
    std::vector<std::string> out;
    for (auto& f : text::split(handle, '_')) {
        if (!f.empty()) out.push_back(std::move(f));
    }
    return out;
}

bool handle_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Keeps the shuffle stream separate from the sampler stream for the same seed.
constexpr std::uint64_t kShuffleSalt = 0x5deece66dULL;

} // namespace

Vocabulary split_handles(const ObservedHandles& handles) {
    Vocabulary out;
    for (const auto& h : handles.handles) {
        for (auto& f : nonempty_fragments(h)) out.insert(text::to_lower(f));
    }
    return out;
}

Vocabulary valid_fragments(const std::set<std::string>& tokens) {
    Vocabulary out;
    for (const auto& t : tokens) {
        std::string norm;
        for (char c : text::to_lower(t)) {
            if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') norm.push_back(c);
        }
        if (!norm.empty()) out.insert(std::move(norm));
    }
    return out;
}

std::set<std::string> adjacent_combinations(std::string_view handle) {
    std::set<std::string> out;
    auto frags = nonempty_fragments(handle);
    for (auto& f : frags) std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
    for (std::size_t i = 0; i + 1 < frags.size(); ++i) {
        out.insert(frags[i] + "_" + frags[i + 1]);
        out.insert(frags[i] + frags[i + 1]);
    }
    return out;
}

std::set<std::string> pairwise_combinations(const Vocabulary& vocab) {
    std::set<std::string> out;
    for (const auto& a : vocab) {
        for (const auto& b : vocab) {
            if (a == b) continue;
            out.insert(a + "_" + b);
            out.insert(a + b);
        }
    }
    return out;
}

std::set<std::string> sample_higher_order(const Vocabulary& vocab, std::size_t k,
                                          std::uint64_t seed) {
    std::set<std::string> out;
    if (k == 0 || vocab.empty()) return out;
    const std::vector<std::string> words(vocab.begin(), vocab.end());
    const bool distinct = words.size() >= kHigherOrderArity;
    Rng rng(seed);
    // Duplicate draws are retried a bounded number of times, so small vocabularies
    // may come back with fewer than k.
    const std::size_t max_attempts = 8 * k + 32;
    for (std::size_t attempt = 0; attempt < max_attempts && out.size() < k; ++attempt) {
        std::vector<std::size_t> picks;
        while (picks.size() < kHigherOrderArity) {
            auto idx = static_cast<std::size_t>(rng.below(words.size()));
            if (distinct && std::find(picks.begin(), picks.end(), idx) != picks.end()) continue;
            picks.push_back(idx);
        }
        std::string s = words[picks[0]];
        for (std::size_t i = 1; i < picks.size(); ++i) {
            if (rng.below(2) == 0) s.push_back('_');
            s += words[picks[i]];
        }
        out.insert(std::move(s));
    }
    return out;
}

bool handle_ok(std::string_view c) {
    if (c.size() < 5 || c.size() > 32) return false;
    if (!std::isalpha(static_cast<unsigned char>(c.front()))) return false;
    for (char ch : c) {
        if (!handle_char(ch)) return false;
    }
    return true;
}

CandidateSet generate_candidates(const SeedLexicon& lexicon, const ObservedHandles& handles,
                                 std::size_t k_higher, std::uint64_t seed) {
    if (lexicon.terms.empty()) throw EmptyLexicon();

    std::set<std::string> tokens = lexicon.terms;
    const auto split = split_handles(handles);
    tokens.insert(split.begin(), split.end());
    const Vocabulary vocab = valid_fragments(tokens);

    std::set<std::string> pool(vocab.begin(), vocab.end());
    for (const auto& h : handles.handles) {
        pool.merge(adjacent_combinations(text::to_lower(h)));
    }
    pool.merge(pairwise_combinations(vocab));
    pool.merge(sample_higher_order(vocab, k_higher, seed));

    CandidateSet out;
    out.seed = seed;
    for (const auto& s : pool) {
        if (handle_ok(s)) out.candidates.push_back(s);
    }
    Rng rng(seed ^ kShuffleSalt);
    rng.shuffle(out.candidates);
    return out;
}

std::size_t candidate_bound(const SeedLexicon& lexicon, const ObservedHandles& handles,
                            std::size_t k_higher) {
    std::set<std::string> tokens = lexicon.terms;
    const auto split = split_handles(handles);
    tokens.insert(split.begin(), split.end());
    const std::size_t w = valid_fragments(tokens).size();
    std::size_t adjacent = 0;
    for (const auto& h : handles.handles) {
        const auto n = nonempty_fragments(h).size();
        if (n > 1) adjacent += 2 * (n - 1);
    }
    return w + adjacent + 2 * w * (w > 0 ? w - 1 : 0) + k_higher;
}

SeedLexicon load_lexicon(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    return SeedLexicon{valid_fragments(std::set<std::string>(lines.begin(), lines.end()))};
}

ObservedHandles load_observed_handles(const std::filesystem::path& path) {
    ObservedHandles out;
    for (const auto& l : read_lines(path)) {
        if (handle_ok(l)) out.handles.insert(l);
    }
    return out;
}

} // namespace antirip
