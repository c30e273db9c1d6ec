#pragma once

#include <limits>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"

namespace joint3ee {

inline constexpr double kForbiddenTransition = -1e9;

// Transition scores between BIO tags plus a start row. Entering I-X is
// forbidden unless the previous tag is B-X or I-X; everything else scores 0.
class TransitionMatrix {
public:
    explicit TransitionMatrix(std::size_t entity_types)
        : tags_(2 * entity_types + 1), start_(tags_, 0.0), scores_(tags_ * tags_, 0.0) {
        for (std::size_t to = 0; to < tags_; ++to) {
            if (!LabelSchema::is_inside(to)) continue;
            start_[to] = kForbiddenTransition;
            for (std::size_t from = 0; from < tags_; ++from) {
                if (!allowed(from, to)) scores_[from * tags_ + to] = kForbiddenTransition;
            }
        }
    }

    static TransitionMatrix for_schema(const LabelSchema& schema) {
        return TransitionMatrix(schema.entity_types().size());
    }

    std::size_t tag_count() const { return tags_; }
    double start(std::size_t to) const { return start_[to]; }
    double operator()(std::size_t from, std::size_t to) const { return scores_[from * tags_ + to]; }

    static bool allowed(std::size_t from, std::size_t to) {
        if (!LabelSchema::is_inside(to)) return true;
        return from != LabelSchema::outside_tag() &&
               LabelSchema::entity_of(from) == LabelSchema::entity_of(to);
    }

    static bool allowed_start(std::size_t to) { return !LabelSchema::is_inside(to); }

private:
    std::size_t tags_;
    std::vector<double> start_;
    std::vector<double> scores_;
};

// Highest-scoring tag sequence under sum_i [score_i(e_i) + trans(e_{i-1}, e_i)].
// Ties resolve to the lowest tag index.
inline std::vector<std::size_t> viterbi_decode(const std::vector<std::vector<double>>& emissions,
                                               const TransitionMatrix& transitions) {
    const std::size_t n = emissions.size();
    if (n == 0) throw ContractError("viterbi_decode: empty sequence");
    const std::size_t k = transitions.tag_count();
    for (const auto& row : emissions) {
        if (row.size() != k) {
            throw DimensionError("viterbi_decode: emission row has " + std::to_string(row.size()) +
                                 " scores for " + std::to_string(k) + " tags");
        }
    }
    std::vector<double> best(k), next(k);
    std::vector<std::size_t> back(n * k, 0);
    for (std::size_t t = 0; t < k; ++t) best[t] = transitions.start(t) + emissions[0][t];
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            double top = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t p = 0; p < k; ++p) {
                const double cand = best[p] + transitions(p, t);
                if (cand > top) {
                    top = cand;
                    arg = p;
                }
            }
            next[t] = top + emissions[i][t];
            back[i * k + t] = arg;
        }
        best.swap(next);
    }
    std::size_t last = 0;
    for (std::size_t t = 1; t < k; ++t) {
        if (best[t] > best[last]) last = t;
    }
    std::vector<std::size_t> tags(n);
    tags[n - 1] = last;
    for (std::size_t i = n - 1; i > 0; --i) tags[i - 1] = back[i * k + tags[i]];
    return tags;
}

// Maximal B-X (I-X)* runs become mentions.
inline std::vector<EntityMention> tags_to_mentions(std::span<const std::size_t> tags,
                                                   const LabelSchema& schema) {
    std::vector<EntityMention> out;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::size_t tag = tags[i];
        if (tag >= schema.bio_count()) throw ContractError("tags_to_mentions: tag index out of range");
        if (LabelSchema::is_inside(tag)) {
            if (out.empty() || out.back().end + 1 != i ||
                schema.entity_type_index(out.back().type) != LabelSchema::entity_of(tag)) {
                throw ContractError("tags_to_mentions: orphan " + schema.bio_tags()[tag] +
                                    " at position " + std::to_string(i));
            }
            out.back().end = i;
        } else if (LabelSchema::is_begin(tag)) {
            out.push_back({i, i, schema.entity_types()[LabelSchema::entity_of(tag)]});
        }
    }
    return out;
}

}  // namespace joint3ee
