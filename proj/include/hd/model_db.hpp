#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hd/types.hpp"

namespace hd {

// Static table of the most frequent (1+m)-grams seen in model generations.
// The first token is the key, the remaining m tokens the value.
class ModelDB {
public:
    struct Entry {
        TokenSeq value;
        std::uint64_t count;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    struct BuildConfig {
        std::size_t top_k = 100000;  // global budget of stored sequences
        std::size_t m = 4;
        std::size_t per_key = 7;     // N
    };

    ModelDB() = default;

    // Counts every contiguous (1+m)-gram inside each doc, keeps the top_k most
    // frequent (count desc, then lexicographic), then groups by first token and
    // keeps at most per_key values per key.
    static ModelDB build(std::span<const TokenSeq> generations, const BuildConfig& config);

    // Up to `want` values in stored order.
    std::vector<TokenSeq> lookup(TokenId key, std::size_t want) const;
    const std::vector<Entry>* entries(TokenId key) const;

    std::size_t m() const { return m_; }
    std::size_t key_count() const { return table_.size(); }
    std::size_t sequence_count() const;
    const std::map<TokenId, std::vector<Entry>>& table() const { return table_; }

    // JSON lines: {"magic":"HDMD","version":1,"m":m} then one record per key in
    // ascending key order: {"key":id,"values":[[...],...],"counts":[...]}.
    std::string serialize() const;
    static ModelDB parse(const std::string& text);
    void save(const std::string& path) const;
    static ModelDB load(const std::string& path);

    friend bool operator==(const ModelDB&, const ModelDB&) = default;

private:
    std::size_t m_ = 0;
    std::map<TokenId, std::vector<Entry>> table_;
};

}  // namespace hd
