#include <doctest.h>

#include <filesystem>
#include <random>

#include "hd/binary_io.hpp"
#include "hd/stats_db.hpp"
#include "oracles.hpp"

using namespace hd;

namespace {
std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / ("hd_sdb_" + name)).string(); }

std::vector<std::pair<TokenSeq, std::uint64_t>> as_pairs(const std::vector<Continuation>& v) {
    std::vector<std::pair<TokenSeq, std::uint64_t>> out;
    for (const auto& c : v) out.emplace_back(c.tokens, c.count);
    return out;
}
}  // namespace

TEST_CASE("small text is sorted") {
    auto db = StatsDB::from_text(TokenSeq{4, 3, 4, kSep}, 5);
    CHECK(db.is_sorted());
    CHECK(db.suffix_array() == std::vector<std::uint32_t>{3, 1, 2, 0});
}

TEST_CASE("single-token document") {
    auto db = StatsDB::build(std::vector<TokenSeq>{{7, kEos}}, 8);
    CHECK(db.size() == 3);
    CHECK(db.text() == TokenSeq{7, kEos, kSep});
    CHECK(db.is_sorted());
    CHECK(db.doc_count() == 1);
}

TEST_CASE("suffix array equals a naive sort") {
    std::mt19937_64 rng(41);
    for (std::size_t n : {10u, 100u, 1000u, 30000u}) {
        for (TokenId vocab : {4u, 9u, 300u}) {
            auto docs = oracle::random_docs(rng, n, vocab, 80);
            auto db = StatsDB::build(docs, vocab);
            CHECK(db.suffix_array() == oracle::naive_suffix_array(oracle::concat_with_sep(docs)));
        }
    }
    // Highly repetitive text exercises many doubling rounds.
    TokenSeq rep(5000, 3);
    rep.push_back(kSep);
    CHECK(StatsDB::from_text(rep, 4).suffix_array() == oracle::naive_suffix_array(rep));
}

TEST_CASE("find_range") {
    auto db = StatsDB::build(std::vector<TokenSeq>{{3, 4, 5, 3, 4, kEos}}, 6);
    auto [lo, hi] = db.find_range(TokenSeq{3, 4});
    CHECK(hi - lo == 2);
    auto absent = db.find_range(TokenSeq{5, 5});
    CHECK(absent.first == absent.second);
    auto whole = db.find_range(db.text());
    CHECK(whole.second - whole.first == 1);
}

TEST_CASE("find_range counts match a substring scan") {
    std::mt19937_64 rng(42);
    auto docs = oracle::random_docs(rng, 20000, 20);
    auto db = StatsDB::build(docs, 20);
    const auto text = oracle::concat_with_sep(docs);
    for (int q = 0; q < 500; ++q) {
        TokenSeq query(1 + rng() % 4);
        for (auto& t : query) t = 3 + static_cast<TokenId>(rng() % 8);
        auto [lo, hi] = db.find_range(query);
        CHECK(hi - lo == oracle::count_occurrences(text, query));
    }
}

TEST_CASE("retrieve takes the continuation after a single occurrence") {
    auto db = StatsDB::build(std::vector<TokenSeq>{{3, 4, 5, 6, 7, 8, kEos}}, 9);
    auto got = db.retrieve(TokenSeq{3, 4}, 4, 7);
    CHECK(got == std::vector<Continuation>{{{5, 6, 7, 8}, 1}});
}

TEST_CASE("retrieve shrinks the tail when the long match is absent") {
    auto db = StatsDB::build(std::vector<TokenSeq>{{3, 5, 6, kEos}, {8, 3, 5, 7, kEos}}, 10);
    auto got = db.retrieve(TokenSeq{9, 3}, 2, 7);
    CHECK(got == std::vector<Continuation>{{{5, 6}, 1}, {{5, 7}, 1}});
    CHECK(db.retrieve(TokenSeq{9, 9}, 2, 7).empty());
    CHECK(db.retrieve(TokenSeq{3}, 2, 0).empty());
}

TEST_CASE("retrieve never crosses a document boundary") {
    auto db = StatsDB::build(std::vector<TokenSeq>{{3, 4}, {5, 6, kEos}}, 7);
    auto got = db.retrieve(TokenSeq{4}, 4, 7);
    CHECK(got.empty());
    auto one = db.retrieve(TokenSeq{3}, 4, 7);
    CHECK(one == std::vector<Continuation>{{{4}, 1}});
}

TEST_CASE("retrieve equals the scan-and-tally oracle") {
    std::mt19937_64 rng(43);
    for (int corpus = 0; corpus < 3; ++corpus) {
        auto docs = oracle::random_docs(rng, 10000, 15 + corpus * 10);
        auto db = StatsDB::build(docs, 15 + corpus * 10);
        const auto text = oracle::concat_with_sep(docs);
        for (int q = 0; q < 200; ++q) {
            TokenSeq tail(1 + rng() % 3);
            for (auto& t : tail) t = 3 + static_cast<TokenId>(rng() % 12);
            const std::size_t m = 1 + rng() % 5, want = rng() % 8;
            CHECK(as_pairs(db.retrieve(tail, m, want)) == oracle::scan_retrieve(text, tail, m, want));
        }
    }
}

TEST_CASE("file round trip is byte stable") {
    std::mt19937_64 rng(44);
    auto db = StatsDB::build(oracle::random_docs(rng, 5000, 30), 30);
    const auto a = tmp("a.hdsa"), b = tmp("b.hdsa");
    db.save(a);
    auto back = StatsDB::load(a, true);
    CHECK(back == db);
    back.save(b);
    CHECK(io::read_file(a) == io::read_file(b));
    std::mt19937_64 same(44);
    CHECK(db.serialize() == StatsDB::build(oracle::random_docs(same, 5000, 30), 30).serialize());
}

TEST_CASE("header layout is little-endian v1") {
    auto db = StatsDB::from_text(TokenSeq{4, 3, 4, kSep}, 5);
    const auto bytes = db.serialize();
    REQUIRE(bytes.size() == 20 + 8 * 4);
    CHECK(std::string(bytes.data(), 4) == "HDSA");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 5);
    CHECK(bytes[12] == 4);
    CHECK(bytes[20] == 4);  // first token
    CHECK(bytes[36] == 3);  // first sa entry
}

TEST_CASE("corrupt files are rejected") {
    std::mt19937_64 rng(45);
    auto db = StatsDB::build(oracle::random_docs(rng, 2000, 30), 30);
    const auto good = db.serialize();

    auto bad_magic = good;
    bad_magic[1] = 'X';
    CHECK_THROWS_WITH(StatsDB::deserialize(bad_magic), doctest::Contains("magic"));
    auto bad_version = good;
    bad_version[4] = 2;
    CHECK_THROWS_WITH(StatsDB::deserialize(bad_version), doctest::Contains("version"));
    auto truncated = good;
    truncated.resize(truncated.size() - 4);
    CHECK_THROWS(StatsDB::deserialize(truncated));
    auto short_header = good;
    short_header.resize(10);
    CHECK_THROWS(StatsDB::deserialize(short_header));
    auto bad_count = good;
    bad_count[12] ^= 0x01;
    CHECK_THROWS(StatsDB::deserialize(bad_count));
    auto bad_perm = good;
    const std::size_t sa_at = 20 + 4 * db.size();
    std::copy(bad_perm.begin() + static_cast<std::ptrdiff_t>(sa_at), bad_perm.begin() + static_cast<std::ptrdiff_t>(sa_at + 4),
              bad_perm.begin() + static_cast<std::ptrdiff_t>(sa_at + 4));
    CHECK_THROWS_WITH(StatsDB::deserialize(bad_perm), doctest::Contains("permutation"));
}

TEST_CASE("flipping a token byte is caught by the sortedness check") {
    std::mt19937_64 rng(46);
    auto db = StatsDB::build(oracle::random_docs(rng, 3000, 30), 30);
    auto bytes = db.serialize();
    // Token 100 moves to a neighbouring id; still in range.
    const std::size_t at = 20 + 4 * 100;
    const auto tok = static_cast<unsigned char>(bytes[at]);
    bytes[at] = static_cast<char>(tok == 3 ? 4 : tok ^ 1u);
    CHECK_NOTHROW(StatsDB::deserialize(bytes, false));
    CHECK_THROWS_WITH(StatsDB::deserialize(bytes, true), doctest::Contains("not sorted"));
}

TEST_CASE("sampled sortedness check") {
    std::mt19937_64 rng(47);
    auto db = StatsDB::build(oracle::random_docs(rng, 50000, 50), 50);
    CHECK(db.is_sorted(10000));
}

TEST_CASE("count ties break lexicographically even where suffix order differs") {
    // Suffix order puts "5 EOS" before "5 SEP"; the ranking must not.
    auto db = StatsDB::build(std::vector<TokenSeq>{{4, 5}, {4, 5, kEos}}, 8);
    auto got = db.retrieve(TokenSeq{4}, 2, 8);
    REQUIRE(got.size() == 2);
    CHECK(got[0].tokens == TokenSeq{5});
    CHECK(got[1].tokens == TokenSeq{5, kEos});
}
