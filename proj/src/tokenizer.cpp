#include "hd/tokenizer.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hd {

namespace {

constexpr std::string_view kReserved[] = {"<unk>", "</s>", "<sep>"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

template <class Fn>
void for_each_word(std::string_view text, Fn&& fn) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) fn(text.substr(start, i - start));
    }
}

}  // namespace

Vocab::Vocab() {
    for (auto word : kReserved) add(word);
}

TokenId Vocab::add(std::string_view word) {
    if (auto it = ids_.find(word); it != ids_.end()) return it->second;
    const auto id = static_cast<TokenId>(words_.size());
    words_.emplace_back(word);
    ids_.emplace(std::string(word), id);
    return id;
}

Vocab Vocab::build(std::span<const std::string> texts) {
    Vocab vocab;
    bool any = false;
    for (const auto& text : texts) {
        for_each_word(text, [&](std::string_view w) {
            vocab.add(w);
            any = true;
        });
    }
    if (!any) throw std::invalid_argument("empty corpus");
    return vocab;
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read vocab file: " + path.string());
    Vocab vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || vocab.contains(line)) {
            throw std::runtime_error("malformed vocab file: " + path.string());
        }
        vocab.add(line);
    }
    return vocab;
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocab file: " + path.string());
    for (std::size_t i = kFirstWordId; i < words_.size(); ++i) out << words_[i] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

bool Vocab::contains(std::string_view word) const { return ids_.find(word) != ids_.end(); }

TokenId Vocab::id_of(std::string_view word) const {
    auto it = ids_.find(word);
    return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::word_of(TokenId id) const {
    if (id >= words_.size()) throw std::out_of_range("unknown token id " + std::to_string(id));
    return words_[id];
}

TokenSeq Vocab::tokenize(std::string_view text) const {
    TokenSeq out;
    for_each_word(text, [&](std::string_view w) { out.push_back(id_of(w)); });
    return out;
}

std::string Vocab::detokenize(TokenView seq) const {
    std::string out;
    for (TokenId id : seq) {
        const std::string& word = word_of(id);
        if (id == kEos) continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

std::size_t Corpus::token_count() const {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.size();
    return n;
}

std::vector<std::string> read_documents(std::span<const std::filesystem::path> paths, DocSplit split) {
    std::vector<std::string> docs;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read corpus file: " + path.string());
        if (split == DocSplit::per_file) {
            std::ostringstream ss;
            ss << in.rdbuf();
            docs.push_back(ss.str());
            continue;
        }
        std::string line;
        while (std::getline(in, line)) {
            bool blank = true;
            for (char c : line) blank = blank && is_space(c);
            if (!blank) docs.push_back(std::move(line));
        }
    }
    return docs;
}

Corpus make_corpus(std::span<const std::string> documents, Vocab vocab) {
    Corpus corpus{{}, std::move(vocab)};
    corpus.docs.reserve(documents.size());
    for (const auto& text : documents) {
        TokenSeq doc = corpus.vocab.tokenize(text);
        // SEP is reserved for StatsDB concatenation.
        for (auto& t : doc) {
            if (t == kSep || t == kEos) t = kUnk;
        }
        doc.push_back(kEos);
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

Corpus load_corpus(std::span<const std::filesystem::path> paths, DocSplit split) {
    auto docs = read_documents(paths, split);
    auto vocab = Vocab::build(docs);
    return make_corpus(docs, std::move(vocab));
}

Corpus load_corpus(std::span<const std::filesystem::path> paths, DocSplit split, Vocab vocab) {
    return make_corpus(read_documents(paths, split), std::move(vocab));
}

}  // namespace hd
