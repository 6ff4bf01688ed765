#include "hd/verification.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace hd {

namespace {

StepOutcome describe(const DraftSet& drafts) {
    StepOutcome out;
    out.accepted_len.assign(drafts.size(), 0);
    for (const auto& c : drafts) {
        out.candidate_len.push_back(c.tokens.size());
        out.sources.push_back(c.source);
        out.drafted_total += c.tokens.size();
    }
    return out;
}

std::optional<std::size_t> pick_winner(const std::vector<std::size_t>& accepted) {
    if (accepted.empty()) return std::nullopt;
    return static_cast<std::size_t>(std::max_element(accepted.begin(), accepted.end()) - accepted.begin());
}

std::int64_t since_ns(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

StepOutcome verify_greedy(const TargetModel& model, TokenView context, const DraftSet& drafts, CallCounter& counter) {
    const auto t0 = std::chrono::steady_clock::now();
    StepOutcome out = describe(drafts);
    ForwardPass pass(model, context, counter);

    for (std::size_t i = 0; i < drafts.size(); ++i) {
        const TokenView cand = drafts[i].tokens;
        std::size_t j = 0;
        while (j < cand.size() && pass.argmax_after(cand.first(j)) == cand[j]) ++j;
        out.accepted_len[i] = j;
    }
    out.winner = pick_winner(out.accepted_len);

    const TokenView path = out.winner ? TokenView(drafts[*out.winner].tokens) : TokenView();
    const std::size_t accepted = out.winner_accepted();
    out.emitted.assign(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(accepted));
    out.emitted.push_back(pass.argmax_after(path.first(accepted)));
    for (std::size_t j = 0; j <= accepted; ++j) out.recycled.push_back(pass.argmax_after(path.first(j)));
    out.verify_ns = since_ns(t0);
    return out;
}

StepOutcome verify_sampling(const TargetModel& model, TokenView context, const DraftSet& drafts, double temperature,
                            Rng& rng, CallCounter& counter) {
    if (!(temperature > 0.0)) throw std::invalid_argument("sampling verification needs temperature > 0");
    const auto t0 = std::chrono::steady_clock::now();
    StepOutcome out = describe(drafts);
    ForwardPass pass(model, context, counter);

    std::vector<std::size_t> survivors(drafts.size());
    for (std::size_t i = 0; i < survivors.size(); ++i) survivors[i] = i;

    for (std::size_t j = 0;; ++j) {
        const Distribution& target = pass.distribution_after(out.emitted);
        const TokenId y = sample(apply_temperature(target, temperature), rng);
        out.recycled.push_back(target.argmax());
        out.emitted.push_back(y);
        std::erase_if(survivors, [&](std::size_t i) {
            const auto& cand = drafts[i].tokens;
            return cand.size() <= j || cand[j] != y;
        });
        for (auto i : survivors) out.accepted_len[i] = j + 1;
        if (survivors.empty() || y == kEos) break;
    }
    out.winner = pick_winner(out.accepted_len);
    out.verify_ns = since_ns(t0);
    return out;
}

DbTallies attribute_verify_success(const StepOutcome& step, const AccessLog& log) {
    const std::size_t n = step.accepted_len.size();
    if (step.sources.size() != n || step.candidate_len.size() != n) {
        throw std::invalid_argument("step outcome has inconsistent per-candidate lengths");
    }
    std::size_t admitted = 0;
    for (const auto& a : log.db) admitted += a.admitted_count;
    if (admitted != n) throw std::invalid_argument("access log does not match step outcome");
    if (step.winner && (*step.winner >= n || !log[step.sources[*step.winner]].attempted)) {
        throw std::invalid_argument("winner source was not attempted");
    }

    DbTallies tallies{};
    for (int d = 0; d < kNumDbs; ++d) {
        const auto& access = log.db[static_cast<std::size_t>(d)];
        if (!access.attempted) continue;
        auto& t = tallies[static_cast<std::size_t>(d)];
        if (access.returned_count == 0) {
            ++t.draft_failure;
            continue;
        }
        ++t.draft_success;
        if (step.winner && db_index(step.sources[*step.winner]) == d && step.winner_accepted() >= 1) ++t.verify_success;
    }
    return tallies;
}

}  // namespace hd
