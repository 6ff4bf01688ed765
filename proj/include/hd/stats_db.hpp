#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hd/types.hpp"

namespace hd {

struct Continuation {
    TokenSeq tokens;
    std::uint64_t count;
    friend bool operator==(const Continuation&, const Continuation&) = default;
};

// Token-level suffix array over a corpus. The text is every document followed
// by SEP, so continuations never cross a document boundary.
//
// Binary format v1, little-endian:
//   "HDSA" | u32 version | u32 vocab_size | u64 n | u32 tokens[n] | u32 sa[n]
class StatsDB {
public:
    StatsDB() = default;

    static StatsDB build(std::span<const TokenSeq> docs, std::size_t vocab_size);
    // Takes an already concatenated text (must end with SEP).
    static StatsDB from_text(TokenSeq text, std::size_t vocab_size);

    // Half-open range of sa entries whose suffix starts with query.
    std::pair<std::size_t, std::size_t> find_range(TokenView query) const;

    // Shrinking-suffix retrieval: match the last len tokens of tail for
    // len = |tail| .. 1, stopping at the first length with at least one
    // non-empty continuation. Continuations are the up-to-m tokens after each
    // occurrence, cut at SEP, tallied and ranked by (count desc, tokens asc).
    std::vector<Continuation> retrieve(TokenView tail, std::size_t m, std::size_t want) const;

    std::size_t size() const { return text_.size(); }
    std::size_t vocab_size() const { return vocab_size_; }
    std::size_t doc_count() const;
    const TokenSeq& text() const { return text_; }
    const std::vector<std::uint32_t>& suffix_array() const { return sa_; }

    // Checks that adjacent suffixes are strictly increasing. With max_pairs > 0
    // only that many evenly spaced pairs are checked.
    bool is_sorted(std::size_t max_pairs = 0) const;

    std::vector<char> serialize() const;
    static StatsDB deserialize(const std::vector<char>& bytes, bool verify = false);
    void save(const std::string& path) const;
    static StatsDB load(const std::string& path, bool verify = false);

    friend bool operator==(const StatsDB&, const StatsDB&) = default;

private:
    int compare_prefix(std::uint32_t pos, TokenView query) const;
    bool suffix_less(std::uint32_t a, std::uint32_t b) const;

    std::size_t vocab_size_ = 0;
    TokenSeq text_;
    std::vector<std::uint32_t> sa_;
};

// Prefix-doubling construction with radix passes, O(n log n).
std::vector<std::uint32_t> build_suffix_array(TokenView text, std::size_t alphabet);

}  // namespace hd
