#include "hd/target_model.hpp"

#include <cmath>
#include <stdexcept>

#include "hd/binary_io.hpp"
#include "hd/simd.hpp"

namespace hd {

TokenId Distribution::argmax() const { return static_cast<TokenId>(simd::argmax(probs)); }

Distribution TargetModel::next_distribution(TokenView context) const {
    Distribution d;
    d.probs.resize(vocab_size());
    next_distribution(context, d.probs);
    return d;
}

TokenId TargetModel::greedy_next(TokenView context) const { return next_distribution(context).argmax(); }

void TargetModel::begin_forward(CallCounter& counter) const {
    counter.record();
    if (call_cost_.count() <= 0) return;
    const auto until = std::chrono::steady_clock::now() + call_cost_;
    while (std::chrono::steady_clock::now() < until) {
    }
}

ForwardPass::ForwardPass(const TargetModel& model, TokenView context, CallCounter& counter)
    : model_(model), scratch_(context.begin(), context.end()), context_len_(context.size()) {
    model_.begin_forward(counter);
}

void ForwardPass::load_context(TokenView draft_prefix) {
    scratch_.resize(context_len_);
    scratch_.insert(scratch_.end(), draft_prefix.begin(), draft_prefix.end());
}

const Distribution& ForwardPass::distribution_after(TokenView draft_prefix) {
    TokenSeq key(draft_prefix.begin(), draft_prefix.end());
    auto it = dist_cache_.find(key);
    if (it != dist_cache_.end()) return it->second;
    load_context(draft_prefix);
    return dist_cache_.emplace(std::move(key), model_.next_distribution(scratch_)).first->second;
}

TokenId ForwardPass::argmax_after(TokenView draft_prefix) {
    TokenSeq key(draft_prefix.begin(), draft_prefix.end());
    if (auto it = argmax_cache_.find(key); it != argmax_cache_.end()) return it->second;
    TokenId best;
    if (auto it = dist_cache_.find(key); it != dist_cache_.end()) {
        best = it->second.argmax();
    } else {
        load_context(draft_prefix);
        probs_.resize(model_.vocab_size());
        model_.next_distribution(scratch_, probs_);
        best = static_cast<TokenId>(simd::argmax(probs_));
    }
    argmax_cache_.emplace(std::move(key), best);
    return best;
}

std::vector<Distribution> score_positions(const TargetModel& model, TokenView context, TokenView draft,
                                          CallCounter& counter) {
    ForwardPass pass(model, context, counter);
    std::vector<Distribution> out;
    out.reserve(draft.size() + 1);
    for (std::size_t j = 0; j <= draft.size(); ++j) out.push_back(pass.distribution_after(draft.first(j)));
    return out;
}

Distribution apply_temperature(const Distribution& dist, double temperature) {
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (temperature == 0.0) {
        Distribution out{std::vector<double>(dist.size(), 0.0)};
        if (!dist.probs.empty()) out.probs[dist.argmax()] = 1.0;
        return out;
    }
    if (temperature == 1.0) return dist;
    const double inv = 1.0 / temperature;
    Distribution out{std::vector<double>(dist.size())};
    double total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        out.probs[i] = dist.probs[i] > 0.0 ? std::pow(dist.probs[i], inv) : 0.0;
        total += out.probs[i];
    }
    // Very low temperatures can underflow every entry.
    if (!(total > 0.0) || !std::isfinite(total)) return apply_temperature(dist, 0.0);
    for (auto& p : out.probs) p /= total;
    return out;
}

double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

TokenId sample(const Distribution& dist, Rng& rng) {
    double total = 0.0;
    for (double p : dist.probs) total += p;
    const double u = uniform_unit(rng) * total;
    double acc = 0.0;
    TokenId last_positive = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist.probs[i] <= 0.0) continue;
        acc += dist.probs[i];
        last_positive = static_cast<TokenId>(i);
        if (u < acc) return last_positive;
    }
    return last_positive;
}

// ---------------------------------------------------------------------------

KGramModel::KGramModel(std::size_t vocab_size, int order, double alpha)
    : vocab_size_(vocab_size), order_(order), alpha_(alpha), tables_(static_cast<std::size_t>(order)) {}

KGramModel KGramModel::fit(std::span<const TokenSeq> docs, std::size_t vocab_size, int order, double alpha) {
    if (order < 1) throw std::invalid_argument("k-gram order must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");
    if (vocab_size == 0) throw std::invalid_argument("empty vocabulary");

    std::vector<std::map<TokenSeq, std::map<TokenId, std::uint64_t>, SeqLess>> raw(static_cast<std::size_t>(order));
    bool any = false;
    for (const auto& doc : docs) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (doc[i] >= vocab_size) throw std::invalid_argument("token id outside vocabulary");
            any = true;
            for (int j = 1; j <= order; ++j) {
                const std::size_t ctx = static_cast<std::size_t>(j - 1);
                if (ctx > i) break;
                TokenSeq key(doc.begin() + static_cast<std::ptrdiff_t>(i - ctx), doc.begin() + static_cast<std::ptrdiff_t>(i));
                ++raw[ctx][std::move(key)][doc[i]];
            }
        }
    }
    if (!any) throw std::invalid_argument("empty corpus");

    KGramModel model(vocab_size, order, alpha);
    for (std::size_t j = 0; j < raw.size(); ++j) {
        for (auto& [ctx, nexts] : raw[j]) {
            ContextCounts cc;
            cc.next.reserve(nexts.size());
            for (auto [tok, c] : nexts) {
                cc.next.emplace_back(tok, c);
                cc.total += c;
            }
            model.tables_[j].emplace(ctx, std::move(cc));
        }
    }
    return model;
}

std::uint64_t KGramModel::count(TokenView context, TokenId next) const {
    if (context.size() >= static_cast<std::size_t>(order_)) return 0;
    const auto& t = tables_[context.size()];
    auto it = t.find(context);
    if (it == t.end()) return 0;
    auto pos = std::lower_bound(it->second.next.begin(), it->second.next.end(), std::pair<TokenId, std::uint64_t>{next, 0});
    return pos != it->second.next.end() && pos->first == next ? pos->second : 0;
}

void KGramModel::next_distribution(TokenView context, std::span<double> out) const {
    const auto v = static_cast<double>(vocab_size_);
    const std::size_t max_ctx = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    for (std::size_t len = max_ctx + 1; len-- > 0;) {
        const auto& t = tables_[len];
        auto it = t.find(context.last(len));
        if (it == t.end() || it->second.total == 0) continue;
        const double denom = static_cast<double>(it->second.total) + alpha_ * v;
        simd::fill(out, alpha_ / denom);
        for (auto [tok, c] : it->second.next) out[tok] = (static_cast<double>(c) + alpha_) / denom;
        return;
    }
    simd::fill(out, 1.0 / v);
}

namespace {
constexpr std::string_view kKgMagic = "HDKG";
constexpr std::uint32_t kKgVersion = 1;
}  // namespace

std::vector<char> KGramModel::serialize() const {
    io::ByteWriter w;
    w.bytes(kKgMagic);
    w.le(kKgVersion);
    w.le(static_cast<std::uint32_t>(vocab_size_));
    w.le(static_cast<std::uint32_t>(order_));
    w.f64(alpha_);
    for (const auto& t : tables_) {
        w.le(static_cast<std::uint64_t>(t.size()));
        for (const auto& [ctx, cc] : t) {
            w.u32_array(ctx.data(), ctx.size());
            w.le(static_cast<std::uint32_t>(cc.next.size()));
            for (auto [tok, c] : cc.next) {
                w.le(tok);
                w.le(c);
            }
        }
    }
    return w.buffer();
}

void KGramModel::save(const std::string& path) const { io::write_file(path, serialize()); }

KGramModel KGramModel::load(const std::string& path) {
    const auto bytes = io::read_file(path);
    io::ByteReader r(bytes.data(), bytes.size(), "k-gram model " + path);
    if (r.remaining() < 4 || r.bytes(4) != kKgMagic) throw std::runtime_error("unsupported k-gram model file: " + path);
    if (r.le<std::uint32_t>() != kKgVersion) throw std::runtime_error("unsupported k-gram model file: " + path);
    const auto vocab = r.le<std::uint32_t>();
    const auto order = r.le<std::uint32_t>();
    const double alpha = r.f64();
    if (order < 1 || order > 64 || vocab == 0 || !(alpha > 0.0)) throw std::runtime_error("corrupt k-gram model header: " + path);
    KGramModel model(vocab, static_cast<int>(order), alpha);
    for (std::uint32_t j = 0; j < order; ++j) {
        const auto n = r.le<std::uint64_t>();
        for (std::uint64_t e = 0; e < n; ++e) {
            TokenSeq ctx(j);
            r.u32_array(ctx.data(), ctx.size());
            ContextCounts cc;
            const auto nn = r.le<std::uint32_t>();
            for (std::uint32_t q = 0; q < nn; ++q) {
                const auto tok = r.le<std::uint32_t>();
                const auto c = r.le<std::uint64_t>();
                if (tok >= vocab) throw std::runtime_error("corrupt k-gram model: token id out of range");
                cc.next.emplace_back(tok, c);
                cc.total += c;
            }
            model.tables_[j].emplace(std::move(ctx), std::move(cc));
        }
    }
    if (r.remaining() != 0) throw std::runtime_error("corrupt k-gram model: trailing bytes");
    return model;
}

}  // namespace hd
