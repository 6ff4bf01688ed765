#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hd/context_db.hpp"
#include "hd/model_db.hpp"
#include "hd/stats_db.hpp"
#include "hd/types.hpp"

namespace hd {

struct DraftCandidate {
    TokenSeq tokens;
    DbKind source;
    friend bool operator==(const DraftCandidate&, const DraftCandidate&) = default;
};

using DraftSet = std::vector<DraftCandidate>;

struct HierarchyConfig {
    std::array<DbKind, kNumDbs> order{DbKind::context, DbKind::model, DbKind::stats};
    std::array<bool, kNumDbs> enabled{true, true, true};
    std::size_t N = 7;  // draft set size
    std::size_t l = 2;  // previous tokens used for stats retrieval
    std::size_t m = 4;  // draft length

    bool is_enabled(DbKind kind) const { return enabled[static_cast<std::size_t>(db_index(kind))]; }
    void validate() const;
};

// "cms", "smc", ... (each letter exactly once).
std::array<DbKind, kNumDbs> parse_order(std::string_view text);
std::string order_name(const std::array<DbKind, kNumDbs>& order);
// "c,m,s", "c", "m,s", ... Empty or "none" disables everything.
std::array<bool, kNumDbs> parse_databases(std::string_view text);
std::string databases_name(const std::array<bool, kNumDbs>& enabled);

struct DbAccess {
    bool attempted = false;
    std::size_t set_size_before = 0;  // draft set size when this DB was reached
    std::size_t returned_count = 0;   // sequences the DB returned
    std::size_t admitted_count = 0;   // of those, not already in the set
    std::int64_t elapsed_ns = 0;

    friend bool operator==(const DbAccess&, const DbAccess&) = default;
};

struct AccessLog {
    std::array<DbAccess, kNumDbs> db;
    std::int64_t total_ns = 0;

    const DbAccess& operator[](DbKind kind) const { return db[static_cast<std::size_t>(db_index(kind))]; }
    DbAccess& operator[](DbKind kind) { return db[static_cast<std::size_t>(db_index(kind))]; }

    friend bool operator==(const AccessLog&, const AccessLog&) = default;
};

// Borrowed database handles for one session. The context DB is mutated
// (lookups refresh recency); the others are read only.
struct Databases {
    ContextDB* context = nullptr;
    const ModelDB* model = nullptr;
    const StatsDB* stats = nullptr;
};

struct DraftResult {
    DraftSet set;
    AccessLog log;
};

// Walks the enabled DBs in config.order, asking each for the remaining quota
// N - |set| and appending candidates not already present. Stops as soon as
// the set holds N candidates; later DBs are then not attempted.
DraftResult hierarchical_draft(TokenView context, Databases dbs, const HierarchyConfig& config);

}  // namespace hd
