#include "hd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hd {

namespace {

std::int64_t since_ns(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
}

// Strips one trailing EOS; rejects EOS anywhere else and out-of-vocabulary ids.
TokenView checked_prompt(TokenView prompt, std::size_t vocab_size) {
    if (!prompt.empty() && prompt.back() == kEos) prompt = prompt.first(prompt.size() - 1);
    if (prompt.empty()) throw std::invalid_argument("empty prompt");
    for (TokenId t : prompt) {
        if (t == kEos) throw std::invalid_argument("malformed prompt");
        if (t >= vocab_size) throw std::invalid_argument("prompt token id outside vocabulary");
    }
    return prompt;
}

// How many of `emitted` to keep: stop after EOS and at the token budget.
std::size_t keep_count(const TokenSeq& emitted, std::size_t budget) {
    std::size_t keep = std::min(emitted.size(), budget);
    for (std::size_t i = 0; i < keep; ++i) {
        if (emitted[i] == kEos) return i + 1;
    }
    return keep;
}

}  // namespace

void DecodeConfig::validate() const {
    if (max_tokens < 1) throw std::invalid_argument("max tokens must be >= 1");
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    hierarchy.validate();
}

DecodeSession::DecodeSession(const TargetModel& model, StaticDatabases dbs, DecodeConfig config)
    : model_(model),
      dbs_(dbs),
      config_(std::move(config)),
      context_(ContextDB::Config{config_.hierarchy.N, config_.hierarchy.m, config_.context_capacity}) {
    config_.validate();
    const auto& h = config_.hierarchy;
    if (h.is_enabled(DbKind::model) && dbs_.model == nullptr) throw std::invalid_argument("model db enabled but missing");
    if (h.is_enabled(DbKind::stats) && dbs_.stats == nullptr) throw std::invalid_argument("stats db enabled but missing");
}

DecodeResult DecodeSession::decode(TokenView raw_prompt) {
    const auto t0 = std::chrono::steady_clock::now();
    const TokenView prompt = checked_prompt(raw_prompt, model_.vocab_size());
    const auto& h = config_.hierarchy;
    const bool use_context = h.is_enabled(DbKind::context);

    Rng rng(config_.seed);
    CallCounter counter;
    DecodeTrace trace;
    trace.prompt.assign(prompt.begin(), prompt.end());

    context_.reset();
    if (use_context) context_.ingest(prompt);

    const Databases dbs{&context_, dbs_.model, dbs_.stats};
    TokenSeq seq(prompt.begin(), prompt.end());
    std::size_t generated = 0;
    bool done = false;
    while (!done && generated < config_.max_tokens) {
        StepRecord rec;
        rec.context_tail.assign(seq.end() - static_cast<std::ptrdiff_t>(std::min(h.l, seq.size())), seq.end());

        DraftResult draft = hierarchical_draft(seq, dbs, h);
        rec.access = draft.log;
        rec.outcome = config_.temperature == 0.0
                          ? verify_greedy(model_, seq, draft.set, counter)
                          : verify_sampling(model_, seq, draft.set, config_.temperature, rng, counter);

        const auto& emitted = rec.outcome.emitted;
        rec.kept = keep_count(emitted, config_.max_tokens - generated);
        const std::size_t old_len = seq.size();
        seq.insert(seq.end(), emitted.begin(), emitted.begin() + static_cast<std::ptrdiff_t>(rec.kept));
        generated += rec.kept;
        done = seq.back() == kEos;

        if (use_context) {
            // Re-ingest across the seam so n-grams spanning old and new tokens land in D_c.
            const std::size_t from = old_len - std::min(old_len, h.m + 1);
            context_.ingest(TokenView(seq).subspan(from));
            if (config_.recycle && !rec.outcome.recycled.empty()) {
                TokenSeq recycled{seq[old_len - 1]};
                recycled.insert(recycled.end(), rec.outcome.recycled.begin(), rec.outcome.recycled.end());
                context_.ingest(recycled);
            }
        }
        rec.context_db_size = context_.size();
        trace.steps.push_back(std::move(rec));
    }
    trace.wall_ns = since_ns(t0);

    DecodeResult result;
    result.output.assign(seq.begin() + static_cast<std::ptrdiff_t>(prompt.size()), seq.end());
    result.metrics = metrics_from_steps(trace.steps, trace.wall_ns);
    if (result.metrics.steps != counter.calls()) throw std::logic_error("model call count drifted from step count");
    if (config_.trace) result.trace = std::move(trace);
    return result;
}

DecodeResult decode(const TargetModel& model, TokenView prompt, StaticDatabases dbs, const DecodeConfig& config) {
    DecodeSession session(model, dbs, config);
    return session.decode(prompt);
}

DecodeResult autoregressive_decode(const TargetModel& model, TokenView raw_prompt, const DecodeConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const TokenView prompt = checked_prompt(raw_prompt, model.vocab_size());
    Rng rng(config.seed);
    CallCounter counter;
    DecodeTrace trace;
    trace.prompt.assign(prompt.begin(), prompt.end());

    TokenSeq seq(prompt.begin(), prompt.end());
    Distribution dist;
    dist.probs.resize(model.vocab_size());
    while (seq.size() - prompt.size() < config.max_tokens) {
        StepRecord rec;
        rec.context_tail.assign(seq.end() - static_cast<std::ptrdiff_t>(std::min(config.hierarchy.l, seq.size())), seq.end());
        const auto tv = std::chrono::steady_clock::now();
        model.begin_forward(counter);
        model.next_distribution(seq, dist.probs);
        const TokenId next = config.temperature == 0.0 ? dist.argmax() : sample(apply_temperature(dist, config.temperature), rng);
        rec.outcome.emitted = {next};
        rec.outcome.verify_ns = since_ns(tv);
        rec.kept = 1;
        seq.push_back(next);
        trace.steps.push_back(std::move(rec));
        if (next == kEos) break;
    }
    trace.wall_ns = since_ns(t0);

    DecodeResult result;
    result.output.assign(seq.begin() + static_cast<std::ptrdiff_t>(prompt.size()), seq.end());
    result.metrics = metrics_from_steps(trace.steps, trace.wall_ns);
    if (config.trace) result.trace = std::move(trace);
    return result;
}

DecodeMetrics metrics_from_steps(std::span<const StepRecord> steps, std::int64_t wall_ns) {
    DecodeMetrics m;
    m.wall_ns = wall_ns;
    m.steps = steps.size();
    if (steps.empty()) return m;

    double draft_sum = 0.0;
    double verify_sum = 0.0;
    std::array<double, kNumDbs> db_sum{};
    for (const auto& s : steps) {
        const auto& o = s.outcome;
        m.tokens_generated += s.kept;
        m.accepted_tokens += o.winner_accepted();
        m.winner_drafted_tokens += o.winner_drafted();
        for (auto a : o.accepted_len) m.all_accepted_tokens += a;
        m.all_drafted_tokens += o.drafted_total;
        draft_sum += static_cast<double>(s.access.total_ns);
        verify_sum += static_cast<double>(o.verify_ns);
        for (std::size_t d = 0; d < kNumDbs; ++d) {
            if (!s.access.db[d].attempted) continue;
            ++m.per_db[d].probes;
            db_sum[d] += static_cast<double>(s.access.db[d].elapsed_ns);
        }
        const auto t = attribute_verify_success(o, s.access);
        for (std::size_t d = 0; d < kNumDbs; ++d) m.tallies[d] += t[d];
    }
    const auto n = static_cast<double>(steps.size());
    m.tau = static_cast<double>(m.tokens_generated) / n;
    if (m.winner_drafted_tokens > 0) {
        m.alpha = static_cast<double>(m.accepted_tokens) / static_cast<double>(m.winner_drafted_tokens);
    }
    if (m.all_drafted_tokens > 0) {
        m.alpha_all = static_cast<double>(m.all_accepted_tokens) / static_cast<double>(m.all_drafted_tokens);
    }
    m.draft_latency.mean_ns = draft_sum / n;
    double var = 0.0;
    for (const auto& s : steps) {
        const double d = static_cast<double>(s.access.total_ns) - m.draft_latency.mean_ns;
        var += d * d;
    }
    m.draft_latency.stddev_ns = std::sqrt(var / n);
    m.verify_mean_ns = verify_sum / n;
    for (std::size_t d = 0; d < kNumDbs; ++d) {
        if (m.per_db[d].probes > 0) m.per_db[d].mean_ns = db_sum[d] / static_cast<double>(m.per_db[d].probes);
    }
    return m;
}

DecodeMetrics aggregate_metrics(std::span<const DecodeTrace> traces) {
    if (traces.empty()) throw std::invalid_argument("no traces to aggregate");
    std::vector<StepRecord> all;
    std::int64_t wall = 0;
    for (const auto& t : traces) {
        all.insert(all.end(), t.steps.begin(), t.steps.end());
        wall += t.wall_ns;
    }
    return metrics_from_steps(all, wall);
}

}  // namespace hd
