#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hd/drafting.hpp"
#include "hd/target_model.hpp"

namespace hd {

struct StepOutcome {
    std::vector<std::size_t> accepted_len;   // per candidate
    std::vector<std::size_t> candidate_len;  // per candidate
    std::vector<DbKind> sources;             // per candidate
    std::optional<std::size_t> winner;       // none when the draft set was empty
    TokenSeq emitted;                        // accepted prefix + correction/bonus token
    TokenSeq recycled;                       // model-preferred tokens along the winner's path
    std::size_t drafted_total = 0;           // sum of candidate lengths
    std::int64_t verify_ns = 0;

    std::size_t winner_accepted() const { return winner ? accepted_len[*winner] : 0; }
    std::size_t winner_drafted() const { return winner ? candidate_len[*winner] : 0; }

    friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

// Greedy verification in one forward pass. Each candidate is accepted up to
// its first token that differs from the model's argmax; the longest
// acceptance wins (earliest candidate on ties). Emits the winner's accepted
// prefix plus the model's argmax at the next position.
StepOutcome verify_greedy(const TargetModel& model, TokenView context, const DraftSet& drafts, CallCounter& counter);

// Sampling verification in one forward pass with point-mass drafts: at each
// position a token is drawn from the temperature-scaled target distribution
// and candidates that disagree are dropped; stops once no candidate survives
// (the last draw is the correction/bonus token) or EOS is drawn. Every
// emitted token is an exact target sample.
StepOutcome verify_sampling(const TargetModel& model, TokenView context, const DraftSet& drafts, double temperature,
                            Rng& rng, CallCounter& counter);

struct DbTally {
    std::uint64_t draft_failure = 0;   // attempted, returned nothing
    std::uint64_t draft_success = 0;   // attempted, returned something
    std::uint64_t verify_success = 0;  // ... and supplied a winner with >= 1 accepted token

    DbTally& operator+=(const DbTally& o) {
        draft_failure += o.draft_failure;
        draft_success += o.draft_success;
        verify_success += o.verify_success;
        return *this;
    }
    friend bool operator==(const DbTally&, const DbTally&) = default;
};

using DbTallies = std::array<DbTally, kNumDbs>;

DbTallies attribute_verify_success(const StepOutcome& step, const AccessLog& log);

}  // namespace hd
