#include "hd/context_db.hpp"

#include <algorithm>
#include <stdexcept>

namespace hd {

ContextDB::ContextDB() : ContextDB(Config{}) {}

ContextDB::ContextDB(Config config) : config_(config) {
    if (config_.per_key == 0 || config_.max_len == 0 || config_.capacity == 0) {
        throw std::invalid_argument("context db limits must be positive");
    }
}

void ContextDB::reset() {
    entries_.clear();
    by_key_.clear();
}

void ContextDB::touch(EntryList::iterator it) {
    it->touched = ++clock_;
    entries_.splice(entries_.begin(), entries_, it);
    auto& slots = by_key_[it->key];
    auto pos = std::find(slots.begin(), slots.end(), it);
    std::rotate(slots.begin(), pos, pos + 1);
}

void ContextDB::erase(EntryList::iterator it) {
    auto slot = by_key_.find(it->key);
    auto& slots = slot->second;
    slots.erase(std::find(slots.begin(), slots.end(), it));
    if (slots.empty()) by_key_.erase(slot);
    entries_.erase(it);
}

std::optional<ContextDB::Pair> ContextDB::insert(TokenId key, TokenView value) {
    if (value.empty()) return std::nullopt;
    if (value.size() > config_.max_len) value = value.first(config_.max_len);

    auto& slots = by_key_[key];
    for (auto it : slots) {
        if (std::equal(it->value.begin(), it->value.end(), value.begin(), value.end())) {
            touch(it);
            return std::nullopt;
        }
    }

    std::optional<Pair> victim;
    if (slots.size() >= config_.per_key) {
        auto lru = slots.back();
        victim = Pair{lru->key, lru->value};
        erase(lru);
    } else if (entries_.size() >= config_.capacity) {
        auto lru = std::prev(entries_.end());
        victim = Pair{lru->key, lru->value};
        erase(lru);
    }

    entries_.push_front(Entry{key, TokenSeq(value.begin(), value.end()), ++clock_});
    // erase() may have dropped the map slot, so look it up again.
    auto& fresh = by_key_[key];
    fresh.insert(fresh.begin(), entries_.begin());
    return victim;
}

void ContextDB::ingest(TokenView seq) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const std::size_t len = std::min(config_.max_len, seq.size() - i - 1);
        insert(seq[i], seq.subspan(i + 1, len));
    }
}

std::vector<TokenSeq> ContextDB::lookup(TokenId key, std::size_t want) {
    std::vector<TokenSeq> out;
    auto slot = by_key_.find(key);
    if (slot == by_key_.end() || want == 0) return out;
    const std::size_t n = std::min(want, slot->second.size());
    std::vector<EntryList::iterator> hits(slot->second.begin(), slot->second.begin() + static_cast<std::ptrdiff_t>(n));
    out.reserve(n);
    for (auto it : hits) out.push_back(it->value);
    // Refresh back to front so the returned order stays MRU-first.
    for (auto it = hits.rbegin(); it != hits.rend(); ++it) touch(*it);
    return out;
}

std::vector<TokenSeq> ContextDB::peek(TokenId key) const {
    std::vector<TokenSeq> out;
    if (auto slot = by_key_.find(key); slot != by_key_.end()) {
        for (auto it : slot->second) out.push_back(it->value);
    }
    return out;
}

}  // namespace hd
