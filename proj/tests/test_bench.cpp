#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "hd/bench.hpp"
#include "oracles.hpp"

using namespace hd;

namespace {

BenchInputs fixture_inputs(const PassageFixture& fx) {
    BenchInputs in;
    in.model = &fx.model;
    in.dbs = fx.dbs();
    in.prompts = {fx.prompt, TokenSeq(fx.passage.begin() + 5, fx.passage.end())};
    return in;
}

DecodeConfig base(std::size_t T = 100) {
    DecodeConfig c;
    c.max_tokens = T;
    return c;
}

BenchOptions quick() {
    BenchOptions o;
    o.runs = 1;
    o.warmup = false;
    return o;
}

DecodeTrace fake_trace(TokenSeq prompt, std::vector<std::pair<std::size_t, TokenSeq>> steps) {
    DecodeTrace t;
    t.prompt = std::move(prompt);
    for (auto& [accepted, emitted] : steps) {
        StepRecord r;
        r.outcome.accepted_len = {accepted};
        r.outcome.candidate_len = {accepted};
        r.outcome.sources = {DbKind::context};
        if (accepted > 0) r.outcome.winner = 0;
        r.outcome.emitted = emitted;
        r.kept = emitted.size();
        t.steps.push_back(std::move(r));
    }
    return t;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto j = Json::parse(R"({"configs": [
        {"name": "a", "order": "smc", "databases": "c,s", "N": 3, "l": 1, "m": 2, "temperature": 0.5, "max_tokens": 9,
         "recycle": false, "seed": 11},
        {"name": "b", "method": "ar"},
        {}
    ]})");
    auto cfgs = parse_run_configs(j, base(77));
    REQUIRE(cfgs.size() == 3);
    CHECK(cfgs[0].name == "a");
    CHECK(order_name(cfgs[0].decode.hierarchy.order) == "smc");
    CHECK(databases_name(cfgs[0].decode.hierarchy.enabled) == "c,s");
    CHECK(cfgs[0].decode.hierarchy.N == 3);
    CHECK(cfgs[0].decode.hierarchy.l == 1);
    CHECK(cfgs[0].decode.hierarchy.m == 2);
    CHECK(cfgs[0].decode.temperature == 0.5);
    CHECK(cfgs[0].decode.max_tokens == 9);
    CHECK_FALSE(cfgs[0].decode.recycle);
    CHECK(cfgs[0].decode.seed == 11);
    CHECK(cfgs[1].autoregressive);
    CHECK(cfgs[2].decode.max_tokens == 77);
    CHECK(parse_run_configs(Json::parse("[]"), base()).empty());
    CHECK_THROWS(parse_run_configs(Json::parse(R"([{"order": "cm"}])"), base()));
    CHECK_THROWS(parse_run_configs(Json::parse(R"({"x": 1})"), base()));
}

TEST_CASE("the AR baseline comes first with speedup 1") {
    PassageFixture fx;
    RunConfig ar{"ar", true, base()};
    auto report = run_bench(fixture_inputs(fx), {ar}, quick());
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].speedup == 1.0);

    RunConfig hdc{"hd", false, base()};
    report = run_bench(fixture_inputs(fx), {hdc}, quick());
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].config.autoregressive);
    CHECK(report.rows[0].speedup == 1.0);
    CHECK(report.rows[1].outputs == report.rows[0].outputs);
    CHECK(report.rows[1].metrics.steps < report.rows[0].metrics.steps);
}

TEST_CASE("one baseline per temperature") {
    PassageFixture fx;
    auto hot = base();
    hot.temperature = 0.8;
    auto report = run_bench(fixture_inputs(fx), {{"g", false, base()}, {"h", false, hot}}, quick());
    REQUIRE(report.rows.size() == 4);
    CHECK(report.row("ar").speedup == 1.0);
    CHECK(report.row("ar@T=0.8").speedup == 1.0);
    CHECK(report.row("ar@T=0.8").config.decode.temperature == 0.8);
}

TEST_CASE("report metrics stay in range") {
    PassageFixture fx;
    auto report = ablate_dbs(fixture_inputs(fx), base(), quick());
    CHECK(report.rows.size() == 8);
    for (const auto& row : report.rows) {
        CHECK(row.metrics.tau >= 1.0);
        if (row.metrics.alpha) CHECK((*row.metrics.alpha >= 0.0 && *row.metrics.alpha <= 1.0));
        for (const auto& out : row.outputs) CHECK(out.size() <= 100);
        CHECK(row.outputs == report.rows[0].outputs);
    }
    const auto j = to_json(report);
    CHECK(j["rows"].size() == 8);
    CHECK(j["rows"][0].contains("tokens_per_sec"));
    const auto quiet = to_json(report, {false});
    CHECK_FALSE(quiet["rows"][0].contains("tokens_per_sec"));
    CHECK_FALSE(quiet["rows"][0].contains("wall_ns"));
}

TEST_CASE("combined hierarchy beats any single database on the fixture") {
    PassageFixture fx;
    auto report = ablate_dbs(fixture_inputs(fx), base(), quick());
    const double all = report.row("dbs:c,m,s").metrics.tau;
    for (const char* one : {"dbs:c", "dbs:m", "dbs:s"}) CHECK(all >= report.row(one).metrics.tau);
}

TEST_CASE("access order ablation follows the probe rule") {
    PassageFixture fx;
    auto report = ablate_order(fixture_inputs(fx), base(), quick());
    CHECK(report.rows.size() == 7);
    for (const auto& row : report.rows) {
        if (row.config.autoregressive) continue;
        const auto& order = row.config.decode.hierarchy.order;
        const std::size_t N = row.config.decode.hierarchy.N;
        for (const auto& trace : row.traces) {
            for (const auto& step : trace.steps) {
                CHECK(step.access[order[0]].attempted);
                std::size_t size = 0;
                for (auto k : order) {
                    CHECK(step.access[k].attempted == (size < N));
                    size += step.access[k].admitted_count;
                }
            }
        }
    }
}

TEST_CASE("missing database files are rejected before running") {
    PassageFixture fx;
    auto in = fixture_inputs(fx);
    in.dbs.stats = nullptr;
    CHECK_THROWS(run_bench(in, {{"hd", false, base()}}, quick()));
    auto only_c = base();
    only_c.hierarchy.enabled = parse_databases("c,m");
    CHECK_NOTHROW(run_bench(in, {{"hd", false, only_c}}, quick()));
    in.prompts.clear();
    CHECK_THROWS(run_bench(in, {{"hd", false, only_c}}, quick()));
}

TEST_CASE("bench output without timing is deterministic") {
    PassageFixture fx;
    auto hot = base();
    hot.temperature = 0.9;
    auto a = run_bench(fixture_inputs(fx), {{"h", false, hot}}, quick());
    auto b = run_bench(fixture_inputs(fx), {{"h", false, hot}}, quick());
    CHECK(to_json(a, {false}).dump() == to_json(b, {false}).dump());
}

TEST_CASE("coverage regions") {
    const TokenSeq p{3, 4};
    // c accepts output positions 0,1; m accepts 0 only; s accepts 1 and 4.
    auto c = fake_trace(p, {{2, {5, 6, 7}}, {0, {8}}});
    auto m = fake_trace(p, {{1, {5, 6}}, {0, {7}}, {0, {8}}});
    auto s = fake_trace(p, {{0, {5}}, {1, {6, 7}}, {0, {8}}, {1, {9, 10}}});
    const std::vector<DecodeTrace> cs{c}, ms{m}, ss{s};
    auto r = coverage_report(cs, ms, ss);
    CHECK(r.cm == 1);      // (0, 5)
    CHECK(r.cs == 1);      // (1, 6)
    CHECK(r.s_only == 1);  // (4, 9)
    CHECK(r.union_size == 3);
    CHECK(r.region_sum() == r.union_size);

    // Identical traces land entirely in the triple region.
    auto same = coverage_report(cs, cs, cs);
    CHECK(same.cms == same.union_size);
    CHECK(same.union_size == 2);

    const std::vector<DecodeTrace> other{fake_trace({3, 5}, {{1, {5, 6}}})};
    CHECK_THROWS(coverage_report(cs, ms, other));
    CHECK_THROWS(coverage_report(cs, ms, std::vector<DecodeTrace>{}));
}

TEST_CASE("coverage on real single-database runs") {
    PassageFixture fx;
    auto report = ablate_dbs(fixture_inputs(fx), base(), quick());
    auto r = coverage_report(report.row("dbs:c").traces, report.row("dbs:m").traces, report.row("dbs:s").traces);
    CHECK(r.region_sum() == r.union_size);
    CHECK(r.union_size > 0);
    const auto j = to_json(r);
    for (const char* k : {"c_only", "m_only", "s_only", "c_and_m", "c_and_s", "m_and_s", "c_m_and_s", "union"}) {
        CHECK(j.contains(k));
    }
}

TEST_CASE("locality examples") {
    auto st = locality_stats(std::vector<TokenSeq>{{3, 4, 5}, {3, 4, 6}}, 2);
    REQUIRE(st.occurrences.size() == 4);
    CHECK(st.occurrences[2].cls == LocalityClass::across);
    CHECK(st.class_counts[2] == 1);

    st = locality_stats(std::vector<TokenSeq>{{3, 4, 3, 4}}, 2);
    CHECK(st.occurrences[2].cls == LocalityClass::within);
    CHECK(st.class_counts == std::array<std::size_t, 3>{2, 1, 0});
    CHECK(st.summary.size() == 2);

    CHECK(occurrences_csv(st).rfind("ngram_id,doc_index,position,class\n", 0) == 0);
    CHECK(summary_csv(st).rfind("ngram_id,tokens,occurrences,docs,within,across\n", 0) == 0);
    CHECK_THROWS(locality_stats(std::vector<TokenSeq>{{3}}, 0));
}

TEST_CASE("locality matches the brute-force classifier") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 20; ++trial) {
        auto docs = oracle::random_docs(rng, 600, 8, 60);
        const std::size_t n = 1 + rng() % 3;
        auto st = locality_stats(docs, n);
        const auto expect = oracle::classify_locality(docs, n);
        REQUIRE(st.occurrences.size() == expect.size());
        std::size_t counted = 0;
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(static_cast<int>(st.occurrences[i].cls) == expect[i]);
        for (const auto& s : st.summary) {
            CHECK(s.tokens.size() == n);
            CHECK(s.within + s.across + 1 == s.occurrences);
            counted += s.occurrences;
        }
        CHECK(counted == expect.size());
    }
}
