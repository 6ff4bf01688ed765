#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hd/engine.hpp"
#include "hd/trace_io.hpp"

namespace hd {

struct RunConfig {
    std::string name;
    bool autoregressive = false;
    DecodeConfig decode;
};

// Accepts either a JSON array of config objects or {"configs": [...]}. Keys:
// name, method ("hd" | "ar"), order, databases, N, l, m, temperature,
// max_tokens, recycle, seed. Missing keys fall back to `base`.
std::vector<RunConfig> parse_run_configs(const Json& j, const DecodeConfig& base);

struct BenchInputs {
    const TargetModel* model = nullptr;
    StaticDatabases dbs;
    std::vector<TokenSeq> prompts;
    std::map<std::string, std::string> fingerprints;  // name -> content hash, for the report
};

struct BenchOptions {
    std::size_t runs = 5;       // timed repetitions; the median is reported
    bool warmup = true;         // one discarded run before timing
    bool keep_traces = true;
};

struct BenchRow {
    RunConfig config;
    DecodeMetrics metrics;              // from the first timed run
    std::vector<DecodeTrace> traces;    // first timed run, one per prompt
    std::vector<TokenSeq> outputs;      // first timed run, one per prompt
    std::vector<double> tokens_per_sec_runs;
    double tokens_per_sec = 0.0;        // median over runs
    double tokens_per_sec_mean = 0.0;
    double tokens_per_sec_stddev = 0.0;
    double speedup = 0.0;               // vs. the AR row at the same temperature
};

struct BenchReport {
    std::vector<BenchRow> rows;
    Json env;

    const BenchRow& row(const std::string& name) const;
};

// Runs an AR baseline (one per distinct temperature, always first) and then
// every config over all prompts. Prompt i is decoded with seed config.seed + i.
// Timed runs are strictly sequential.
BenchReport run_bench(const BenchInputs& inputs, std::vector<RunConfig> configs, const BenchOptions& options);

// One row per permutation of "cms", all DBs enabled.
BenchReport ablate_order(const BenchInputs& inputs, const DecodeConfig& base, const BenchOptions& options);

// One row per non-empty subset of {c, m, s}.
BenchReport ablate_dbs(const BenchInputs& inputs, const DecodeConfig& base, const BenchOptions& options);

Json to_json(const BenchReport& report, JsonOptions opts = {});

// Writes <dir>/<row>__p<i>.jsonl for every kept trace.
void write_traces(const BenchReport& report, const std::string& dir, JsonOptions opts = {});

// ---------------------------------------------------------------------------
// Accepted-token coverage across single-DB runs.
//
// An event is (prompt index, output position, token) for every token taken
// from a draft (the winner's accepted prefix). Regions are exclusive.
struct CoverageReport {
    std::uint64_t c_only = 0, m_only = 0, s_only = 0;
    std::uint64_t cm = 0, cs = 0, ms = 0, cms = 0;
    std::uint64_t union_size = 0;

    std::uint64_t region_sum() const { return c_only + m_only + s_only + cm + cs + ms + cms; }
    friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

struct AcceptedEvent {
    std::size_t prompt;
    std::size_t position;
    TokenId token;
    auto operator<=>(const AcceptedEvent&) const = default;
};

std::vector<AcceptedEvent> accepted_events(std::span<const DecodeTrace> traces);

// Each argument holds one trace per prompt, same prompts in the same order.
CoverageReport coverage_report(std::span<const DecodeTrace> c_runs, std::span<const DecodeTrace> m_runs,
                               std::span<const DecodeTrace> s_runs);

Json to_json(const CoverageReport& report);

// ---------------------------------------------------------------------------
// n-gram temporal locality over a sequence of generations.
enum class LocalityClass { first, within, across };

struct NgramOccurrence {
    std::size_t ngram_id;  // dense id in first-seen order
    std::size_t doc;
    std::size_t position;
    LocalityClass cls;
};

struct NgramSummary {
    std::size_t ngram_id;
    TokenSeq tokens;
    std::size_t occurrences = 0;
    std::size_t docs = 0;
    std::size_t within = 0;
    std::size_t across = 0;
};

struct LocalityStats {
    std::vector<NgramOccurrence> occurrences;
    std::vector<NgramSummary> summary;
    std::array<std::size_t, 3> class_counts{};  // first, within, across
};

// An occurrence is `within` if the same n-gram appeared earlier in the same
// doc, else `across` if it appeared in an earlier doc, else `first`.
LocalityStats locality_stats(std::span<const TokenSeq> docs, std::size_t n);

std::string_view locality_class_name(LocalityClass cls);
std::string occurrences_csv(const LocalityStats& stats);
std::string summary_csv(const LocalityStats& stats);

}  // namespace hd
