#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace antirip {

/// Seed terms, lowercase, drawn from [a-z0-9_].
struct SeedLexicon {
    std::set<std::string> terms;
};

/// Complete public handles seen earlier (e.g. in old t.me links).
struct ObservedHandles {
    std::set<std::string> handles;
};

using Vocabulary = std::set<std::string>;

struct CandidateSet {
    std::vector<std::string> candidates;
    std::uint64_t seed = 0;
};

/// Handles compose at most three fragments in the higher-order sampler.
inline constexpr std::size_t kHigherOrderArity = 3;

/// Underscore fragments of every handle, lowercased. Empty fragments are dropped.
Vocabulary split_handles(const ObservedHandles& handles);

/// Lowercases, strips anything outside [a-z0-9_], drops empties, deduplicates.
Vocabulary valid_fragments(const std::set<std::string>& tokens);

/// "a_b_c" -> {a_b, ab, b_c, bc}. Fewer than two fragments yields nothing.
std::set<std::string> adjacent_combinations(std::string_view handle);

/// w1_w2 and w1w2 for every ordered pair of distinct fragments.
std::set<std::string> pairwise_combinations(const Vocabulary& vocab);

/// Up to k seeded three-fragment compositions; each junction is "_" or "".
std::set<std::string> sample_higher_order(const Vocabulary& vocab, std::size_t k,
                                          std::uint64_t seed);

/// Public handle rule: a letter, then 4 to 31 of [A-Za-z0-9_].
bool handle_ok(std::string_view candidate);

/// Candidate handles for probing, filtered by handle_ok and shuffled by seed.
/// Throws EmptyLexicon when the lexicon has no terms.
CandidateSet generate_candidates(const SeedLexicon& lexicon, const ObservedHandles& handles,
                                 std::size_t k_higher, std::uint64_t seed);

/// Upper bound on |generate_candidates(...)|.
std::size_t candidate_bound(const SeedLexicon& lexicon, const ObservedHandles& handles,
                            std::size_t k_higher);

/// One term per line; terms are normalized like valid_fragments.
SeedLexicon load_lexicon(const std::filesystem::path& path);
ObservedHandles load_observed_handles(const std::filesystem::path& path);

} // namespace antirip
