#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hd/types.hpp"

namespace hd {

// Per-session draft table: single-token key -> up to `per_key` value
// sequences of length <= `max_len`. Least-recently-used (key, value) pairs are
// evicted per key once a key is full, and globally once `capacity` pairs are
// stored. Lookups refresh recency.
class ContextDB {
public:
    struct Config {
        std::size_t per_key = 7;    // N
        std::size_t max_len = 4;    // m
        std::size_t capacity = 4096;
    };

    struct Pair {
        TokenId key;
        TokenSeq value;
        friend bool operator==(const Pair&, const Pair&) = default;
    };

    ContextDB();
    explicit ContextDB(Config config);

    ContextDB(const ContextDB&) = delete;
    ContextDB& operator=(const ContextDB&) = delete;
    ContextDB(ContextDB&&) = default;
    ContextDB& operator=(ContextDB&&) = default;

    // Drops every pair; the recency clock keeps counting.
    void reset();

    // Inserts key seq[i] -> seq[i+1 .. i+min(m, |seq|-i-1)] for every i that has a successor.
    void ingest(TokenView seq);

    // Inserts or refreshes one pair. Returns the evicted pair, if any.
    std::optional<Pair> insert(TokenId key, TokenView value);

    // Up to `want` values for key, most recently used first.
    std::vector<TokenSeq> lookup(TokenId key, std::size_t want);

    // Values for key in MRU order without touching recency.
    std::vector<TokenSeq> peek(TokenId key) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t key_count() const { return by_key_.size(); }
    std::uint64_t clock() const { return clock_; }
    const Config& config() const { return config_; }

private:
    struct Entry {
        TokenId key;
        TokenSeq value;
        std::uint64_t touched;
    };
    using EntryList = std::list<Entry>;  // front = most recent

    void touch(EntryList::iterator it);
    void erase(EntryList::iterator it);

    Config config_;
    std::uint64_t clock_ = 0;
    EntryList entries_;
    // Per key, iterators in MRU order.
    std::unordered_map<TokenId, std::vector<EntryList::iterator>> by_key_;
};

}  // namespace hd
