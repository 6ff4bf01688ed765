#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hd/context_db.hpp"
#include "hd/drafting.hpp"
#include "hd/target_model.hpp"
#include "hd/verification.hpp"

namespace hd {

struct DecodeConfig {
    std::size_t max_tokens = 1024;  // T
    double temperature = 0.0;
    std::uint64_t seed = 7;
    HierarchyConfig hierarchy;
    bool recycle = true;
    bool trace = false;
    std::size_t context_capacity = 4096;

    void validate() const;
};

struct StepRecord {
    TokenSeq context_tail;  // last l tokens before the step
    AccessLog access;
    StepOutcome outcome;
    std::size_t kept = 0;         // emitted tokens kept after EOS/T truncation
    std::size_t context_db_size = 0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct DecodeTrace {
    TokenSeq prompt;
    std::vector<StepRecord> steps;
    std::int64_t wall_ns = 0;

    friend bool operator==(const DecodeTrace&, const DecodeTrace&) = default;
};

struct LatencyStats {
    double mean_ns = 0.0;
    double stddev_ns = 0.0;

    friend bool operator==(const LatencyStats&, const LatencyStats&) = default;
};

struct DbProbeStats {
    std::uint64_t probes = 0;  // steps on which the DB was attempted
    double mean_ns = 0.0;      // per probe

    friend bool operator==(const DbProbeStats&, const DbProbeStats&) = default;
};

struct DecodeMetrics {
    std::uint64_t steps = 0;  // model calls
    std::uint64_t tokens_generated = 0;
    std::uint64_t accepted_tokens = 0;        // winner tokens accepted
    std::uint64_t winner_drafted_tokens = 0;  // winner tokens drafted
    std::uint64_t all_accepted_tokens = 0;    // summed over every candidate
    std::uint64_t all_drafted_tokens = 0;
    std::optional<double> alpha;      // accepted / drafted, winners only
    std::optional<double> alpha_all;  // accepted / drafted, all candidates
    double tau = 0.0;
    LatencyStats draft_latency;
    std::array<DbProbeStats, kNumDbs> per_db{};
    double verify_mean_ns = 0.0;
    std::int64_t wall_ns = 0;
    DbTallies tallies{};

    friend bool operator==(const DecodeMetrics&, const DecodeMetrics&) = default;
};

struct DecodeResult {
    TokenSeq output;  // generated tokens, prompt excluded
    DecodeMetrics metrics;
    std::optional<DecodeTrace> trace;
};

// Shared read-only databases. The context DB lives in the session.
struct StaticDatabases {
    const ModelDB* model = nullptr;
    const StatsDB* stats = nullptr;
};

// One decode session: owns the context DB, rng and call counter. Sessions are
// independent; the model and static DBs may be shared across threads.
class DecodeSession {
public:
    DecodeSession(const TargetModel& model, StaticDatabases dbs, DecodeConfig config);

    // Hierarchy-drafted speculative decoding of one prompt. Resets the context
    // DB, seeds the rng from config.seed, and counts model calls from zero.
    DecodeResult decode(TokenView prompt);

    const ContextDB& context_db() const { return context_; }

private:
    const TargetModel& model_;
    StaticDatabases dbs_;
    DecodeConfig config_;
    ContextDB context_;
};

DecodeResult decode(const TargetModel& model, TokenView prompt, StaticDatabases dbs, const DecodeConfig& config);

// One model call per token.
DecodeResult autoregressive_decode(const TargetModel& model, TokenView prompt, const DecodeConfig& config);

// Metrics as a pure function of recorded steps (wall time supplied separately).
DecodeMetrics metrics_from_steps(std::span<const StepRecord> steps, std::int64_t wall_ns);
DecodeMetrics aggregate_metrics(std::span<const DecodeTrace> traces);

}  // namespace hd
