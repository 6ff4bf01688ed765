#include "hd/drafting.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace hd {

namespace {

DbKind kind_from_letter(char c) {
    switch (c) {
        case 'c': return DbKind::context;
        case 'm': return DbKind::model;
        case 's': return DbKind::stats;
        default: throw std::invalid_argument(std::string("unknown database '") + c + "'");
    }
}

std::int64_t since_ns(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void HierarchyConfig::validate() const {
    std::array<int, kNumDbs> seen{};
    for (auto k : order) ++seen[static_cast<std::size_t>(db_index(k))];
    for (int s : seen) {
        if (s != 1) throw std::invalid_argument("access order must list c, m and s exactly once");
    }
    if (N < 1) throw std::invalid_argument("draft set size N must be >= 1");
    if (l < 1) throw std::invalid_argument("prefix length l must be >= 1");
    if (m < 1) throw std::invalid_argument("draft length m must be >= 1");
}

std::array<DbKind, kNumDbs> parse_order(std::string_view text) {
    if (text.size() != kNumDbs) throw std::invalid_argument("access order must be a permutation of \"cms\"");
    std::array<DbKind, kNumDbs> order{};
    for (std::size_t i = 0; i < text.size(); ++i) order[i] = kind_from_letter(text[i]);
    HierarchyConfig probe;
    probe.order = order;
    probe.validate();
    return order;
}

std::string order_name(const std::array<DbKind, kNumDbs>& order) {
    std::string s;
    for (auto k : order) s.push_back(db_letter(k));
    return s;
}

std::array<bool, kNumDbs> parse_databases(std::string_view text) {
    std::array<bool, kNumDbs> enabled{false, false, false};
    if (text.empty() || text == "none") return enabled;
    for (char c : text) {
        if (c == ',' || c == ' ') continue;
        auto& flag = enabled[static_cast<std::size_t>(db_index(kind_from_letter(c)))];
        if (flag) throw std::invalid_argument("database listed twice");
        flag = true;
    }
    return enabled;
}

std::string databases_name(const std::array<bool, kNumDbs>& enabled) {
    std::string s;
    for (int i = 0; i < kNumDbs; ++i) {
        if (!enabled[static_cast<std::size_t>(i)]) continue;
        if (!s.empty()) s.push_back(',');
        s.push_back(db_letter(static_cast<DbKind>(i)));
    }
    return s.empty() ? "none" : s;
}

DraftResult hierarchical_draft(TokenView context, Databases dbs, const HierarchyConfig& config) {
    if (context.empty()) throw std::invalid_argument("drafting needs a non-empty context");
    DraftResult result;
    auto& set = result.set;
    const auto t_start = std::chrono::steady_clock::now();
    const TokenId key = context.back();
    const TokenView tail = context.last(std::min(config.l, context.size()));

    auto admit = [&](TokenSeq tokens, DbKind source) -> bool {
        if (tokens.size() > config.m) tokens.resize(config.m);
        if (tokens.empty()) return false;
        const bool dup = std::any_of(set.begin(), set.end(), [&](const DraftCandidate& c) { return c.tokens == tokens; });
        if (dup) return false;
        set.push_back(DraftCandidate{std::move(tokens), source});
        return true;
    };

    for (DbKind kind : config.order) {
        if (!config.is_enabled(kind)) continue;
        if (set.size() >= config.N) break;
        auto& access = result.log[kind];
        access.attempted = true;
        access.set_size_before = set.size();
        const std::size_t want = config.N - set.size();
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<TokenSeq> got;
        switch (kind) {
            case DbKind::context:
                if (dbs.context == nullptr) throw std::invalid_argument("context db enabled but not provided");
                got = dbs.context->lookup(key, want);
                break;
            case DbKind::model:
                if (dbs.model == nullptr) throw std::invalid_argument("model db enabled but not provided");
                got = dbs.model->lookup(key, want);
                break;
            case DbKind::stats:
                if (dbs.stats == nullptr) throw std::invalid_argument("stats db enabled but not provided");
                for (auto& c : dbs.stats->retrieve(tail, config.m, want)) got.push_back(std::move(c.tokens));
                break;
        }
        access.returned_count = got.size();
        for (auto& tokens : got) {
            if (set.size() >= config.N) break;
            access.admitted_count += admit(std::move(tokens), kind) ? 1 : 0;
        }
        access.elapsed_ns = since_ns(t0);
    }
    result.log.total_ns = since_ns(t_start);
    return result;
}

}  // namespace hd
