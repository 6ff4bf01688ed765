#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hd/types.hpp"

namespace hd {

// Whitespace word-level vocabulary. Ids 0..2 are reserved (UNK, EOS, SEP);
// corpus words get ids from 3 in first-occurrence order.
class Vocab {
public:
    Vocab();

    static Vocab build(std::span<const std::string> texts);

    // One word per line; line i (0-based) is id i + 3.
    static Vocab load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const { return words_.size(); }
    bool contains(std::string_view word) const;
    TokenId id_of(std::string_view word) const;  // kUnk if absent
    const std::string& word_of(TokenId id) const;

    TokenSeq tokenize(std::string_view text) const;
    std::string detokenize(TokenView seq) const;

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.words_ == b.words_; }

private:
    TokenId add(std::string_view word);

    struct StringHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };

    std::vector<std::string> words_;
    std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> ids_;
};

struct Corpus {
    std::vector<TokenSeq> docs;
    Vocab vocab;

    std::size_t token_count() const;
};

enum class DocSplit { per_line, per_file };

// Reads whole files; empty lines are skipped in per-line mode.
std::vector<std::string> read_documents(std::span<const std::filesystem::path> paths, DocSplit split);

// Tokenizes every document with `vocab` and appends EOS.
Corpus make_corpus(std::span<const std::string> documents, Vocab vocab);

// Builds the vocabulary from the files themselves.
Corpus load_corpus(std::span<const std::filesystem::path> paths, DocSplit split);
Corpus load_corpus(std::span<const std::filesystem::path> paths, DocSplit split, Vocab vocab);

}  // namespace hd
