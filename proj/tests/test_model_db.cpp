#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "hd/model_db.hpp"
#include "oracles.hpp"

using namespace hd;

namespace {
std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / ("hd_mdb_" + name)).string(); }
}  // namespace

TEST_CASE("a single window becomes one entry") {
    const std::vector<TokenSeq> docs{{3, 4, 5, 6, kEos}};
    auto db = ModelDB::build(docs, {100000, 4, 7});
    REQUIRE(db.entries(3) != nullptr);
    CHECK(*db.entries(3) == std::vector<ModelDB::Entry>{{{4, 5, 6, kEos}, 1}});
    CHECK(db.sequence_count() == 1);
}

TEST_CASE("top-k keeps the most frequent sequence") {
    std::vector<TokenSeq> docs;
    for (int i = 0; i < 5; ++i) docs.push_back({7, 8, 9, 9, 9});
    docs.push_back({3, 4, 5, 6, 10, 11});
    auto db = ModelDB::build(docs, {1, 4, 7});
    CHECK(db.key_count() == 1);
    CHECK(db.lookup(7, 7) == std::vector<TokenSeq>{{8, 9, 9, 9}});
    CHECK(db.lookup(3, 7).empty());
}

TEST_CASE("lookup edge cases") {
    const std::vector<TokenSeq> docs{{3, 4, 5, 6, kEos}};
    auto db = ModelDB::build(docs, {10, 4, 7});
    CHECK(db.lookup(42, 3).empty());
    CHECK(db.lookup(3, 0).empty());
    CHECK_THROWS(ModelDB::build(std::vector<TokenSeq>{}, {10, 4, 7}));
    CHECK_THROWS(ModelDB::build(docs, {10, 0, 7}));
}

TEST_CASE("retained set and order match the counting oracle") {
    std::mt19937_64 rng(31);
    auto docs = oracle::random_docs(rng, 50000, 12);
    const std::size_t m = 3, top_k = 2000, per_key = 7;
    auto db = ModelDB::build(docs, {top_k, m, per_key});

    auto counts = oracle::count_grams(docs, m + 1);
    std::vector<std::pair<TokenSeq, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(std::min(top_k, ranked.size()));
    std::map<TokenId, std::vector<ModelDB::Entry>> expect;
    for (const auto& [gram, c] : ranked) {
        auto& list = expect[gram.front()];
        if (list.size() < per_key) list.push_back({TokenSeq(gram.begin() + 1, gram.end()), c});
    }
    CHECK(db.table() == expect);
    CHECK(db.sequence_count() <= top_k);
    for (const auto& [key, list] : db.table()) {
        CHECK(list.size() <= per_key);
        for (std::size_t i = 0; i + 1 < list.size(); ++i) {
            const bool strictly = list[i].count > list[i + 1].count ||
                                  (list[i].count == list[i + 1].count && list[i].value < list[i + 1].value);
            CHECK(strictly);
        }
        for (const auto& e : list) {
            CHECK(e.value.size() == m);
            // Never spans a document: EOS may only be the last token.
            for (std::size_t i = 0; i + 1 < e.value.size(); ++i) CHECK(e.value[i] != kEos);
        }
    }
}

TEST_CASE("file round trip") {
    const std::vector<TokenSeq> docs{{3, 4, 5, 6, kEos}};
    auto db = ModelDB::build(docs, {100000, 4, 7});
    const auto path = tmp("tiny.jsonl");
    db.save(path);
    CHECK(ModelDB::load(path) == db);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == R"({"magic":"HDMD","version":1,"m":4})");
}

TEST_CASE("large DB saves to identical bytes") {
    std::mt19937_64 rng(32);
    auto docs = oracle::random_docs(rng, 400000, 60);
    auto db = ModelDB::build(docs, {100000, 4, 7});
    auto again = ModelDB::build(docs, {100000, 4, 7});
    CHECK(db.serialize() == again.serialize());
    const auto a = tmp("big_a.jsonl"), b = tmp("big_b.jsonl");
    db.save(a);
    ModelDB::load(a).save(b);
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
}

TEST_CASE("bad or truncated files are rejected") {
    const std::vector<TokenSeq> docs{{3, 4, 5, 6, kEos}, {3, 9, 9, 9, kEos}};
    auto text = ModelDB::build(docs, {100, 4, 7}).serialize();
    CHECK_THROWS_WITH(ModelDB::parse(text.substr(0, text.size() - 5)), doctest::Contains("unsupported model-db file"));
    auto bad_magic = text;
    bad_magic.replace(bad_magic.find("HDMD"), 4, "XXXX");
    CHECK_THROWS_WITH(ModelDB::parse(bad_magic), doctest::Contains("unsupported model-db file"));
    auto bad_version = text;
    bad_version.replace(bad_version.find("\"version\":1"), 11, "\"version\":2");
    CHECK_THROWS_WITH(ModelDB::parse(bad_version), doctest::Contains("unsupported model-db file"));
    CHECK_THROWS(ModelDB::parse(""));
}
