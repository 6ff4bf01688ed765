#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hd/types.hpp"

namespace hd {

struct Distribution {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    double operator[](TokenId id) const { return probs[id]; }
    // Lowest id among the maxima.
    TokenId argmax() const;

    friend bool operator==(const Distribution&, const Distribution&) = default;
};

// Counts target-model invocations; one per forward pass.
class CallCounter {
public:
    void record() { ++calls_; }
    std::uint64_t calls() const { return calls_; }

private:
    std::uint64_t calls_ = 0;
};

// The target model contract. Implementations must be deterministic and
// safe to call concurrently from several decode sessions.
class TargetModel {
public:
    virtual ~TargetModel() = default;

    virtual std::size_t vocab_size() const = 0;
    // Writes P(next | context) into out (size vocab_size()).
    virtual void next_distribution(TokenView context, std::span<double> out) const = 0;

    Distribution next_distribution(TokenView context) const;
    TokenId greedy_next(TokenView context) const;

    // Simulated latency of one forward pass, spent by busy waiting. Zero by default.
    void set_call_cost(std::chrono::nanoseconds cost) { call_cost_ = cost; }
    std::chrono::nanoseconds call_cost() const { return call_cost_; }

    // One counted forward pass: bumps the counter and burns the call cost.
    void begin_forward(CallCounter& counter) const;

private:
    std::chrono::nanoseconds call_cost_{0};
};

// Scores drafted positions inside a single forward pass. Queries are by
// draft prefix appended to the fixed context; results are memoized so
// candidates sharing a prefix are scored once.
class ForwardPass {
public:
    ForwardPass(const TargetModel& model, TokenView context, CallCounter& counter);

    const Distribution& distribution_after(TokenView draft_prefix);
    TokenId argmax_after(TokenView draft_prefix);

private:
    void load_context(TokenView draft_prefix);

    const TargetModel& model_;
    TokenSeq scratch_;
    std::size_t context_len_;
    std::vector<double> probs_;
    std::map<TokenSeq, Distribution> dist_cache_;
    std::map<TokenSeq, TokenId> argmax_cache_;
};

// |draft| + 1 distributions; position j conditions on context ++ draft[0..j).
std::vector<Distribution> score_positions(const TargetModel& model, TokenView context, TokenView draft,
                                          CallCounter& counter);

// T == 0 gives a point mass at argmax; T > 0 renormalizes p^(1/T).
Distribution apply_temperature(const Distribution& dist, double temperature);

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(Rng& rng);

// Inverse-CDF draw.
TokenId sample(const Distribution& dist, Rng& rng);

// ---------------------------------------------------------------------------
// k-gram reference model.
//
// Counts orders 1..k within each document. next_distribution uses the longest
// order j <= k whose (j-1)-token context suffix has been observed, and applies
// add-alpha smoothing over the vocabulary at that order:
//
//     p(v) = (count(ctx, v) + alpha) / (total(ctx) + alpha * V)
//
// With no usable order at all the result is uniform.
class KGramModel final : public TargetModel {
public:
    struct ContextCounts {
        std::uint64_t total = 0;
        std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by token id

        friend bool operator==(const ContextCounts&, const ContextCounts&) = default;
    };
    struct SeqLess {
        using is_transparent = void;
        bool operator()(TokenView a, TokenView b) const {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
        }
    };
    using OrderTable = std::map<TokenSeq, ContextCounts, SeqLess>;

    static KGramModel fit(std::span<const TokenSeq> docs, std::size_t vocab_size, int order, double alpha);

    static KGramModel load(const std::string& path);
    void save(const std::string& path) const;
    std::vector<char> serialize() const;

    std::size_t vocab_size() const override { return vocab_size_; }
    void next_distribution(TokenView context, std::span<double> out) const override;
    using TargetModel::next_distribution;

    int order() const { return order_; }
    double alpha() const { return alpha_; }
    // Table for n-gram order j (1-based); keys are (j-1)-token contexts.
    const OrderTable& table(int j) const { return tables_.at(static_cast<std::size_t>(j - 1)); }
    std::uint64_t count(TokenView context, TokenId next) const;

    friend bool operator==(const KGramModel& a, const KGramModel& b) {
        return a.vocab_size_ == b.vocab_size_ && a.order_ == b.order_ && a.alpha_ == b.alpha_ && a.tables_ == b.tables_;
    }

private:
    KGramModel(std::size_t vocab_size, int order, double alpha);

    std::size_t vocab_size_;
    int order_;
    double alpha_;
    std::vector<OrderTable> tables_;
};

}  // namespace hd
