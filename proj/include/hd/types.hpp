#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hd {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;
using TokenView = std::span<const TokenId>;

inline constexpr TokenId kUnk = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kSep = 2;
inline constexpr TokenId kFirstWordId = 3;

// Draft sources, in default access order.
enum class DbKind : std::uint8_t { context = 0, model = 1, stats = 2 };

inline constexpr int kNumDbs = 3;

constexpr char db_letter(DbKind kind) {
    switch (kind) {
        case DbKind::context: return 'c';
        case DbKind::model: return 'm';
        case DbKind::stats: return 's';
    }
    return '?';
}

constexpr int db_index(DbKind kind) { return static_cast<int>(kind); }

}  // namespace hd
