#pragma once

#include <numeric>

#include "hd/engine.hpp"

// Repeated-passage fixture: a passage of distinct tokens, a k-gram model that
// has learned the passage as a cycle, and prompt = passage ++ passage.
struct PassageFixture {
    hd::TokenSeq passage;
    hd::TokenSeq prompt;
    std::vector<hd::TokenSeq> docs;
    hd::KGramModel model;
    hd::ModelDB model_db;
    hd::StatsDB stats_db;

    explicit PassageFixture(std::size_t length = 40)
        : passage(make_passage(length)),
          prompt(repeat(passage, 2, false)),
          docs{repeat(passage, 3, true)},  // last token precedes the first more often than EOS
          model(hd::KGramModel::fit(docs, vocab_size(), 3, 0.01)),
          model_db(hd::ModelDB::build(docs, {100000, 4, 7})),
          stats_db(hd::StatsDB::build(docs, vocab_size())) {}

    std::size_t vocab_size() const { return hd::kFirstWordId + passage.size(); }
    hd::StaticDatabases dbs() const { return {&model_db, &stats_db}; }

    static hd::TokenSeq make_passage(std::size_t length) {
        hd::TokenSeq p(length);
        std::iota(p.begin(), p.end(), hd::kFirstWordId);
        return p;
    }
    static hd::TokenSeq repeat(const hd::TokenSeq& p, int times, bool eos) {
        hd::TokenSeq out;
        for (int i = 0; i < times; ++i) out.insert(out.end(), p.begin(), p.end());
        if (eos) out.push_back(hd::kEos);
        return out;
    }
};
