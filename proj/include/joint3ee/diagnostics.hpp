#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "entity_detector.hpp"
#include "gradcheck.hpp"
#include "model.hpp"
#include "random.hpp"

namespace joint3ee {

// Three-token probe for the end-to-end gradient check: one PER attacker,
// an Attack trigger and a GPE target, with full linguistic layers.
inline Sentence gradient_probe_sentence() {
    Sentence s;
    s.tokens = {"soldiers", "attacked", "baghdad"};
    s.pos = {"NNS", "VBD", "NNP"};
    s.chunk = {"B-NP", "B-VP", "B-NP"};
    s.deps = {{1, "nsubj"}, {-1, "root"}, {1, "dobj"}};
    s.entities = {{0, 0, "PER"}, {2, 2, "GPE"}};
    s.events = {{1, "Attack", {{0, "Attacker"}, {1, "Target"}}}};
    return s;
}

inline ModelConfig gradient_probe_config() {
    ModelConfig c;
    c.embed_dim = 8;
    c.hidden_dim = 6;
    c.ff_hidden = 10;
    return c;
}

// Finite-difference check of C* over every parameter of a freshly
// initialized model, dropout and UNK replacement off.
inline GradCheckResult run_gradient_suite(const GradCheckOptions& options = {},
                                          const ModelConfig& config = gradient_probe_config(),
                                          std::uint64_t seed = 5) {
    const std::vector<Sentence> corpus{gradient_probe_sentence()};
    Rng rng(seed);
    JointModel model(LabelSchema::from_corpus(corpus), Vocabulary::build(corpus),
                     BinaryFeatureEncoder::fit(corpus, config.external_features), config, rng);
    const GoldLabels gold = gold_labels(corpus[0], model.schema());
    const LossWeights weights;
    auto params = model.parameters();
    return check_gradients(
        [&](Tape& tape) {
            return model.loss(tape, corpus[0], gold, weights, ForwardContext::inference()).total;
        },
        params, options);
}

// Score of a tag sequence, accumulated in the same order as the decoder's
// recurrence so that equal paths give bit-identical totals.
inline double sequence_score(const std::vector<std::vector<double>>& emissions,
                             const TransitionMatrix& transitions, const std::vector<std::size_t>& tags) {
    double s = transitions.start(tags[0]) + emissions[0][tags[0]];
    for (std::size_t i = 1; i < tags.size(); ++i) s = (s + transitions(tags[i - 1], tags[i])) + emissions[i][tags[i]];
    return s;
}

inline bool sequence_is_valid(const std::vector<std::size_t>& tags) {
    if (tags.empty() || !TransitionMatrix::allowed_start(tags[0])) return false;
    for (std::size_t i = 1; i < tags.size(); ++i) {
        if (!TransitionMatrix::allowed(tags[i - 1], tags[i])) return false;
    }
    return true;
}

// Maximum score over all k^n sequences by odometer enumeration.
inline double exhaustive_best_score(const std::vector<std::vector<double>>& emissions,
                                    const TransitionMatrix& transitions) {
    const std::size_t n = emissions.size(), k = transitions.tag_count();
    std::vector<std::size_t> tags(n, 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        best = std::max(best, sequence_score(emissions, transitions, tags));
        std::size_t pos = 0;
        while (pos < n && ++tags[pos] == k) tags[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

struct ViterbiOracleResult {
    std::size_t instances = 0;
    std::size_t mismatches = 0;
    std::size_t validity_instances = 0;
    std::size_t violations = 0;
    std::vector<std::string> failures;  // first few offending instances

    bool passed() const { return mismatches == 0 && violations == 0; }
};

namespace detail {

inline std::vector<std::vector<double>> random_emissions(Rng& rng, std::size_t n, std::size_t k, double spread) {
    std::vector<std::vector<double>> e(n, std::vector<double>(k));
    for (auto& row : e) {
        for (double& v : row) v = rng.uniform(-spread, spread);
    }
    return e;
}

}  // namespace detail

// Random instances with n <= 6 and at most 7 tags are compared against
// exhaustive enumeration; further instances (longer, wider, with scores
// biased towards I tags) are only checked for forbidden transitions.
inline ViterbiOracleResult run_viterbi_oracle(std::size_t trials = 100, std::size_t validity_trials = 10000,
                                              std::uint64_t seed = 1) {
    ViterbiOracleResult r;
    Rng rng(seed);
    auto note = [&r](const std::string& what) {
        if (r.failures.size() < 10) r.failures.push_back(what);
    };
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t types = 1 + rng.index(3);  // 3, 5 or 7 tags
        const TransitionMatrix trans(types);
        const std::size_t n = 1 + rng.index(6);
        const auto e = detail::random_emissions(rng, n, trans.tag_count(), 5.0);
        const auto tags = viterbi_decode(e, trans);
        ++r.instances;
        const double got = sequence_score(e, trans, tags);
        const double want = exhaustive_best_score(e, trans);
        if (got != want || !sequence_is_valid(tags)) {
            ++r.mismatches;
            std::ostringstream msg;
            msg.precision(17);
            msg << "instance " << t << " (n=" << n << ", tags=" << trans.tag_count() << "): decoded score " << got
                << ", exhaustive " << want;
            note(msg.str());
        }
    }
    for (std::size_t t = 0; t < validity_trials; ++t) {
        const std::size_t types = 1 + rng.index(4);
        const TransitionMatrix trans(types);
        const std::size_t n = 1 + rng.index(12);
        auto e = detail::random_emissions(rng, n, trans.tag_count(), 1.0 + 50.0 * rng.uniform());
        for (auto& row : e) {
            for (std::size_t tag = 0; tag < row.size(); ++tag) {
                if (LabelSchema::is_inside(tag) && rng.bernoulli(0.5)) row[tag] += 100.0;
            }
        }
        const auto tags = viterbi_decode(e, trans);
        ++r.validity_instances;
        if (!sequence_is_valid(tags)) {
            ++r.violations;
            note("validity instance " + std::to_string(t) + " decoded a forbidden transition");
        }
    }
    return r;
}

}  // namespace joint3ee
