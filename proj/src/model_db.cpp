#include "hd/model_db.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace hd {

namespace {

struct SeqHash {
    std::size_t operator()(const TokenSeq& s) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (TokenId t : s) {
            h ^= t;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

[[noreturn]] void unsupported(const std::string& why) { throw std::runtime_error("unsupported model-db file: " + why); }

}  // namespace

ModelDB ModelDB::build(std::span<const TokenSeq> generations, const BuildConfig& config) {
    if (config.m < 1) throw std::invalid_argument("m must be >= 1");
    if (config.per_key < 1) throw std::invalid_argument("per-key cap must be >= 1");
    if (generations.empty()) throw std::invalid_argument("empty generations corpus");

    const std::size_t width = config.m + 1;
    std::unordered_map<TokenSeq, std::uint64_t, SeqHash> counts;
    for (const auto& doc : generations) {
        for (std::size_t i = 0; i + width <= doc.size(); ++i) {
            ++counts[TokenSeq(doc.begin() + static_cast<std::ptrdiff_t>(i), doc.begin() + static_cast<std::ptrdiff_t>(i + width))];
        }
    }

    std::vector<std::pair<const TokenSeq*, std::uint64_t>> ranked;
    ranked.reserve(counts.size());
    for (const auto& [gram, c] : counts) ranked.emplace_back(&gram, c);
    auto better = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return *a.first < *b.first;
    };
    const std::size_t keep = std::min(config.top_k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
    ranked.resize(keep);

    ModelDB db;
    db.m_ = config.m;
    // ranked is already in (count desc, lexicographic) order, which within a
    // key is (count desc, value asc).
    for (const auto& [gram, c] : ranked) {
        auto& list = db.table_[gram->front()];
        if (list.size() < config.per_key) list.push_back(Entry{TokenSeq(gram->begin() + 1, gram->end()), c});
    }
    return db;
}

std::vector<TokenSeq> ModelDB::lookup(TokenId key, std::size_t want) const {
    std::vector<TokenSeq> out;
    const auto* list = entries(key);
    if (list == nullptr) return out;
    const std::size_t n = std::min(want, list->size());
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back((*list)[i].value);
    return out;
}

const std::vector<ModelDB::Entry>* ModelDB::entries(TokenId key) const {
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &it->second;
}

std::size_t ModelDB::sequence_count() const {
    std::size_t n = 0;
    for (const auto& [k, list] : table_) n += list.size();
    return n;
}

std::string ModelDB::serialize() const {
    std::string out;
    nlohmann::ordered_json header;
    header["magic"] = "HDMD";
    header["version"] = 1;
    header["m"] = m_;
    out += header.dump();
    out += '\n';
    for (const auto& [key, list] : table_) {
        nlohmann::ordered_json rec;
        rec["key"] = key;
        auto values = nlohmann::ordered_json::array();
        auto counts = nlohmann::ordered_json::array();
        for (const auto& e : list) {
            values.push_back(e.value);
            counts.push_back(e.count);
        }
        rec["values"] = std::move(values);
        rec["counts"] = std::move(counts);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

ModelDB ModelDB::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) unsupported("missing header");
    ModelDB db;
    try {
        const auto header = nlohmann::json::parse(line);
        if (!header.is_object() || header.value("magic", "") != "HDMD") unsupported("bad magic");
        if (header.value("version", 0) != 1) unsupported("bad version");
        db.m_ = header.at("m").get<std::size_t>();
        if (db.m_ < 1) unsupported("bad m");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto rec = nlohmann::json::parse(line);
            const auto key = rec.at("key").get<TokenId>();
            const auto values = rec.at("values").get<std::vector<TokenSeq>>();
            const auto counts = rec.at("counts").get<std::vector<std::uint64_t>>();
            if (values.empty() || values.size() != counts.size()) unsupported("values/counts mismatch");
            if (db.table_.count(key) != 0) unsupported("duplicate key");
            auto& list = db.table_[key];
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (values[i].size() != db.m_) unsupported("value length differs from m");
                list.push_back(Entry{values[i], counts[i]});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        unsupported(e.what());
    }
    // Files always end with a newline; anything else was cut short.
    if (text.empty() || text.back() != '\n') unsupported("truncated");
    return db;
}

void ModelDB::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize();
    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelDB ModelDB::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace hd
