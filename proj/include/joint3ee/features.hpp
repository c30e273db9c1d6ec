#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "random.hpp"
#include "tensor.hpp"

namespace joint3ee {

// Word -> dense index, with index 0 reserved for unknown words.
class Vocabulary {
public:
    static constexpr std::size_t kUnk = 0;
    static constexpr const char* kUnkToken = "<unk>";

    Vocabulary() : words_{kUnkToken}, counts_{0} { index_.emplace(kUnkToken, kUnk); }

    static Vocabulary build(std::span<const Sentence> corpus) {
        std::map<std::string, std::size_t> counts;
        for (const auto& s : corpus) {
            for (const auto& w : s.tokens) ++counts[w];
        }
        Vocabulary v;
        for (const auto& [w, c] : counts) v.add(w, c);
        return v;
    }

    std::size_t add(const std::string& word, std::size_t count = 1) {
        auto [it, inserted] = index_.emplace(word, words_.size());
        if (inserted) {
            words_.push_back(word);
            counts_.push_back(count);
        } else {
            counts_[it->second] += count;
        }
        return it->second;
    }

    std::size_t index(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? kUnk : it->second;
    }

    bool contains(const std::string& word) const { return index_.contains(word); }
    std::size_t size() const { return words_.size(); }
    const std::string& word(std::size_t i) const { return words_[i]; }
    std::size_t count(std::size_t i) const { return counts_[i]; }
    const std::vector<std::string>& words() const { return words_; }

    json to_json() const { return {{"words", words_}, {"counts", counts_}}; }

    static Vocabulary from_json(const json& j) {
        Vocabulary v;
        auto words = j.at("words").get<std::vector<std::string>>();
        auto counts = j.at("counts").get<std::vector<std::size_t>>();
        if (words.empty() || words[0] != kUnkToken || counts.size() != words.size()) {
            throw ParseError("vocabulary: malformed word list");
        }
        for (std::size_t i = 1; i < words.size(); ++i) v.add(words[i], counts[i]);
        return v;
    }

private:
    std::vector<std::string> words_;
    std::vector<std::size_t> counts_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr double kEmbeddingInitRange = 0.25;
inline constexpr double kWeightInitRange = 0.08;

// Trainable |V| x dim word embedding matrix.
struct EmbeddingTable {
    Tensor table;
    std::size_t pretrained_rows = 0;

    std::size_t dim() const { return table.cols(); }
};

inline EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, Rng& rng) {
    std::vector<double> values(vocab.size() * dim);
    for (double& v : values) v = rng.uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
    return {Tensor::parameter("embeddings", {vocab.size(), dim}, std::move(values)), 0};
}

// Reads "word v1 ... v_dim" lines. Words in the vocabulary take the file's
// vector; every other row is drawn uniformly from [-0.25, 0.25].
inline EmbeddingTable load_pretrained(std::istream& in, const Vocabulary& vocab, std::size_t dim,
                                      Rng& rng) {
    EmbeddingTable emb = random_embeddings(vocab, dim, rng);
    auto values = emb.table.mutable_values();
    std::vector<bool> seen(vocab.size(), false);
    std::string line;
    std::size_t line_no = 0;
    std::size_t file_dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string word;
        if (!(fields >> word)) continue;
        std::vector<double> vec;
        double x;
        while (fields >> x) vec.push_back(x);
        if (!fields.eof()) throw ParseError("embedding: non-numeric value", line_no);
        if (file_dim == 0) file_dim = vec.size();
        if (vec.size() != file_dim) {
            throw ParseError("embedding: expected " + std::to_string(file_dim) + " values, got " +
                                 std::to_string(vec.size()),
                             line_no);
        }
        if (file_dim != dim) {
            throw DimensionError("embedding file has dimension " + std::to_string(file_dim) +
                                 " but the model uses " + std::to_string(dim));
        }
        const std::size_t idx = vocab.index(word);
        if (idx == Vocabulary::kUnk && word != Vocabulary::kUnkToken) continue;
        if (seen[idx]) continue;
        seen[idx] = true;
        ++emb.pretrained_rows;
        std::copy(vec.begin(), vec.end(), values.begin() + static_cast<std::ptrdiff_t>(idx * dim));
    }
    return emb;
}

inline EmbeddingTable load_pretrained(const std::string& path, const Vocabulary& vocab,
                                      std::size_t dim, Rng& rng) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file '" + path + "'");
    return load_pretrained(in, vocab, dim, rng);
}

// One-hot POS and chunk tags plus an indicator vector of the dependency
// relations touching a token. Tag inventories are closed after fit();
// unseen tags encode as zeros.
class BinaryFeatureEncoder {
public:
    BinaryFeatureEncoder() = default;

    static BinaryFeatureEncoder fit(std::span<const Sentence> corpus, bool enabled = true) {
        std::set<std::string> pos, chunk, rel;
        for (const auto& s : corpus) {
            pos.insert(s.pos.begin(), s.pos.end());
            chunk.insert(s.chunk.begin(), s.chunk.end());
            for (const auto& d : s.deps) {
                if (d.head >= 0) rel.insert(d.relation);
            }
        }
        BinaryFeatureEncoder enc;
        enc.enabled_ = enabled;
        enc.pos_ = {pos.begin(), pos.end()};
        enc.chunk_ = {chunk.begin(), chunk.end()};
        enc.relations_ = {rel.begin(), rel.end()};
        enc.reindex();
        return enc;
    }

    bool enabled() const { return enabled_; }
    void set_enabled(bool on) { enabled_ = on; }
    std::size_t pos_width() const { return enabled_ ? pos_.size() : 0; }
    std::size_t chunk_width() const { return enabled_ ? chunk_.size() : 0; }
    std::size_t relation_width() const { return enabled_ ? relations_.size() : 0; }
    std::size_t width() const { return pos_width() + chunk_width() + relation_width(); }

    std::vector<double> encode(const Sentence& s, std::size_t i) const {
        std::vector<double> out(width(), 0.0);
        if (!enabled_) return out;
        if (s.has_pos()) set(out, 0, pos_index_, s.pos[i]);
        if (s.has_chunk()) set(out, pos_.size(), chunk_index_, s.chunk[i]);
        if (s.has_deps()) {
            const std::size_t base = pos_.size() + chunk_.size();
            // Relations of the token's own edge and of edges it heads.
            if (s.deps[i].head >= 0) set(out, base, relation_index_, s.deps[i].relation);
            for (const auto& d : s.deps) {
                if (d.head == static_cast<int>(i)) set(out, base, relation_index_, d.relation);
            }
        }
        return out;
    }

    json to_json() const {
        return {{"enabled", enabled_}, {"pos", pos_}, {"chunk", chunk_}, {"relations", relations_}};
    }

    static BinaryFeatureEncoder from_json(const json& j) {
        BinaryFeatureEncoder enc;
        enc.enabled_ = j.at("enabled").get<bool>();
        enc.pos_ = j.at("pos").get<std::vector<std::string>>();
        enc.chunk_ = j.at("chunk").get<std::vector<std::string>>();
        enc.relations_ = j.at("relations").get<std::vector<std::string>>();
        enc.reindex();
        return enc;
    }

private:
    using Index = std::map<std::string, std::size_t, std::less<>>;

    static void set(std::vector<double>& out, std::size_t base, const Index& index,
                    const std::string& tag) {
        auto it = index.find(tag);
        if (it != index.end()) out[base + it->second] = 1.0;
    }

    void reindex() {
        auto build = [](const std::vector<std::string>& tags, Index& index) {
            index.clear();
            for (std::size_t i = 0; i < tags.size(); ++i) index.emplace(tags[i], i);
        };
        build(pos_, pos_index_);
        build(chunk_, chunk_index_);
        build(relations_, relation_index_);
    }

    bool enabled_ = false;
    std::vector<std::string> pos_, chunk_, relations_;
    Index pos_index_, chunk_index_, relation_index_;
};

// D_i: embeddings of tokens i-u..i+u, concatenated, zero vectors outside
// the sentence.
inline Tensor local_context(Tape& tape, std::span<const Tensor> embeddings, std::size_t i, int u,
                            std::size_t dim) {
    if (u < 0) throw ContractError("local_context: window must be non-negative, got " + std::to_string(u));
    if (i >= embeddings.size()) throw ContractError("local_context: position out of range");
    const Tensor zero = Tensor::constant(std::vector<double>(dim, 0.0));
    std::vector<Tensor> parts;
    parts.reserve(2 * static_cast<std::size_t>(u) + 1);
    const auto n = static_cast<long>(embeddings.size());
    for (long k = static_cast<long>(i) - u; k <= static_cast<long>(i) + u; ++k) {
        parts.push_back(k < 0 || k >= n ? zero : embeddings[static_cast<std::size_t>(k)]);
    }
    return tape.concat(parts);
}

}  // namespace joint3ee
