#include "hd/stats_db.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "hd/binary_io.hpp"
#include "hd/simd.hpp"

namespace hd {

namespace {

constexpr std::string_view kMagic = "HDSA";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;

[[noreturn]] void corrupt(const std::string& why) { throw std::runtime_error("corrupt stats-db file: " + why); }

}  // namespace

std::vector<std::uint32_t> build_suffix_array(TokenView text, std::size_t alphabet) {
    const std::size_t n = text.size();
    std::vector<std::uint32_t> sa(n), rank(n), tmp(n), second(n);
    if (n == 0) return sa;

    // Initial order by first token.
    std::vector<std::uint32_t> bucket(alphabet + 1, 0);
    for (TokenId t : text) ++bucket[t + 1];
    for (std::size_t c = 1; c <= alphabet; ++c) bucket[c] += bucket[c - 1];
    for (std::size_t i = 0; i < n; ++i) sa[bucket[text[i]]++] = static_cast<std::uint32_t>(i);
    rank[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) rank[sa[i]] = rank[sa[i - 1]] + (text[sa[i]] != text[sa[i - 1]]);

    std::vector<std::uint32_t> cnt;
    for (std::size_t k = 1; rank[sa[n - 1]] + 1 < n; k <<= 1) {
        // Order by second key: suffixes with nothing at i + k first, then by sa.
        std::size_t p = 0;
        for (std::size_t i = n - std::min(k, n); i < n; ++i) second[p++] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < n; ++i) {
            if (sa[i] >= k) second[p++] = static_cast<std::uint32_t>(sa[i] - k);
        }
        // Stable counting sort by first key.
        const std::size_t classes = rank[sa[n - 1]] + 1;
        cnt.assign(classes + 1, 0);
        for (std::size_t i = 0; i < n; ++i) ++cnt[rank[i] + 1];
        for (std::size_t c = 1; c <= classes; ++c) cnt[c] += cnt[c - 1];
        for (std::size_t i = 0; i < n; ++i) sa[cnt[rank[second[i]]]++] = second[i];

        auto key2 = [&](std::uint32_t i) -> std::int64_t { return i + k < n ? static_cast<std::int64_t>(rank[i + k]) : -1; };
        tmp[sa[0]] = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const bool same = rank[sa[i]] == rank[sa[i - 1]] && key2(sa[i]) == key2(sa[i - 1]);
            tmp[sa[i]] = tmp[sa[i - 1]] + (same ? 0 : 1);
        }
        rank.swap(tmp);
    }
    return sa;
}

StatsDB StatsDB::build(std::span<const TokenSeq> docs, std::size_t vocab_size) {
    if (docs.empty()) throw std::invalid_argument("empty corpus");
    std::size_t total = 0;
    for (const auto& d : docs) total += d.size() + 1;
    if (total >= (std::uint64_t{1} << 32)) throw std::length_error("corpus too large for format v1");
    TokenSeq text;
    text.reserve(total);
    for (const auto& d : docs) {
        text.insert(text.end(), d.begin(), d.end());
        text.push_back(kSep);
    }
    return from_text(std::move(text), vocab_size);
}

StatsDB StatsDB::from_text(TokenSeq text, std::size_t vocab_size) {
    if (text.empty() || text.back() != kSep) throw std::invalid_argument("stats text must end with SEP");
    if (text.size() >= (std::uint64_t{1} << 32)) throw std::length_error("corpus too large for format v1");
    if (vocab_size <= kSep || vocab_size > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("bad vocabulary size");
    }
    for (TokenId t : text) {
        if (t >= vocab_size) throw std::invalid_argument("token id outside vocabulary");
    }
    StatsDB db;
    db.vocab_size_ = vocab_size;
    db.sa_ = build_suffix_array(text, vocab_size);
    db.text_ = std::move(text);
    return db;
}

std::size_t StatsDB::doc_count() const { return simd::count_equal(text_, kSep); }

// <0, 0, >0 as the suffix at pos sorts before, starts with, or sorts after query.
int StatsDB::compare_prefix(std::uint32_t pos, TokenView query) const {
    const std::size_t avail = text_.size() - pos;
    const std::size_t len = std::min(avail, query.size());
    const std::size_t i = simd::active().mismatch(text_.data() + pos, query.data(), len);
    if (i < len) return text_[pos + i] < query[i] ? -1 : 1;
    return len < query.size() ? -1 : 0;
}

bool StatsDB::suffix_less(std::uint32_t a, std::uint32_t b) const {
    const std::size_t la = text_.size() - a;
    const std::size_t lb = text_.size() - b;
    const std::size_t len = std::min(la, lb);
    const std::size_t i = simd::active().mismatch(text_.data() + a, text_.data() + b, len);
    if (i < len) return text_[a + i] < text_[b + i];
    return la < lb;
}

std::pair<std::size_t, std::size_t> StatsDB::find_range(TokenView query) const {
    if (query.empty()) return {0, sa_.size()};
    auto lo = std::partition_point(sa_.begin(), sa_.end(), [&](std::uint32_t p) { return compare_prefix(p, query) < 0; });
    auto hi = std::partition_point(lo, sa_.end(), [&](std::uint32_t p) { return compare_prefix(p, query) == 0; });
    return {static_cast<std::size_t>(lo - sa_.begin()), static_cast<std::size_t>(hi - sa_.begin())};
}

std::vector<Continuation> StatsDB::retrieve(TokenView tail, std::size_t m, std::size_t want) const {
    std::vector<Continuation> out;
    if (want == 0 || m == 0) return out;
    for (std::size_t len = tail.size(); len >= 1; --len) {
        const TokenView query = tail.last(len);
        const auto [lo, hi] = find_range(query);
        if (lo == hi) continue;
        // Suffixes sharing a truncated continuation are adjacent in suffix
        // order, so one pass over the range counts each distinct run.
        struct Run {
            std::size_t start, length;
            std::uint64_t count;
        };
        std::vector<Run> runs;
        for (std::size_t r = lo; r < hi; ++r) {
            const std::size_t start = sa_[r] + len;
            std::size_t end = start;
            while (end < text_.size() && end - start < m && text_[end] != kSep) ++end;
            if (end == start) continue;
            const std::size_t n = end - start;
            if (!runs.empty() && runs.back().length == n &&
                simd::mismatch(TokenView(text_).subspan(runs.back().start, n), TokenView(text_).subspan(start, n)) == n) {
                ++runs.back().count;
            } else {
                runs.push_back(Run{start, n, 1});
            }
        }
        if (runs.empty()) continue;
        const auto tokens_of = [&](const Run& run) { return TokenView(text_).subspan(run.start, run.length); };
        // Suffix order differs from plain lexicographic order around SEP, so
        // the tie-break compares tokens explicitly.
        const std::size_t keep = std::min(want, runs.size());
        std::partial_sort(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(keep), runs.end(),
                          [&](const Run& a, const Run& b) {
                              if (a.count != b.count) return a.count > b.count;
                              const auto x = tokens_of(a), y = tokens_of(b);
                              return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
                          });
        runs.resize(keep);
        out.reserve(runs.size());
        for (const auto& run : runs) {
            const auto t = tokens_of(run);
            out.push_back(Continuation{TokenSeq(t.begin(), t.end()), run.count});
        }
        if (out.size() > want) out.resize(want);
        return out;
    }
    return out;
}

bool StatsDB::is_sorted(std::size_t max_pairs) const {
    const std::size_t pairs = sa_.size() < 2 ? 0 : sa_.size() - 1;
    if (max_pairs == 0 || max_pairs >= pairs) {
        for (std::size_t i = 0; i < pairs; ++i) {
            if (!suffix_less(sa_[i], sa_[i + 1])) return false;
        }
        return true;
    }
    const double stride = static_cast<double>(pairs) / static_cast<double>(max_pairs);
    for (std::size_t s = 0; s < max_pairs; ++s) {
        const auto i = static_cast<std::size_t>(static_cast<double>(s) * stride);
        if (!suffix_less(sa_[i], sa_[i + 1])) return false;
    }
    return true;
}

std::vector<char> StatsDB::serialize() const {
    io::ByteWriter w;
    w.bytes(kMagic);
    w.le(kVersion);
    w.le(static_cast<std::uint32_t>(vocab_size_));
    w.le(static_cast<std::uint64_t>(text_.size()));
    w.u32_array(text_.data(), text_.size());
    w.u32_array(sa_.data(), sa_.size());
    return w.buffer();
}

StatsDB StatsDB::deserialize(const std::vector<char>& bytes, bool verify) {
    io::ByteReader r(bytes.data(), bytes.size(), "stats-db");
    if (bytes.size() < kHeaderBytes) corrupt("truncated header");
    if (r.bytes(4) != kMagic) corrupt("bad magic");
    if (r.le<std::uint32_t>() != kVersion) corrupt("unsupported version");
    const auto vocab = r.le<std::uint32_t>();
    const auto n = r.le<std::uint64_t>();
    if (vocab <= kSep) corrupt("bad vocabulary size");
    if (n == 0 || n >= (std::uint64_t{1} << 32)) corrupt("bad token count");
    if (r.remaining() != 8 * n) corrupt("payload size does not match token count");

    StatsDB db;
    db.vocab_size_ = vocab;
    db.text_.resize(n);
    db.sa_.resize(n);
    r.u32_array(db.text_.data(), n);
    r.u32_array(db.sa_.data(), n);

    for (TokenId t : db.text_) {
        if (t >= vocab) corrupt("token id outside vocabulary");
    }
    if (db.text_.back() != kSep) corrupt("text does not end with SEP");
    std::vector<bool> seen(n, false);
    for (auto p : db.sa_) {
        if (p >= n || seen[p]) corrupt("suffix array is not a permutation");
        seen[p] = true;
    }
    if (verify && !db.is_sorted()) corrupt("suffix array is not sorted");
    return db;
}

void StatsDB::save(const std::string& path) const { io::write_file(path, serialize()); }

StatsDB StatsDB::load(const std::string& path, bool verify) { return deserialize(io::read_file(path), verify); }

}  // namespace hd
