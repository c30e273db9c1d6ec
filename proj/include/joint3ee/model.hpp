#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "entity_detector.hpp"
#include "event_extractor.hpp"
#include "features.hpp"
#include "gru.hpp"
#include "layers.hpp"
#include "tensor.hpp"

namespace joint3ee {

struct ModelConfig {
    std::size_t embed_dim = 300;
    std::size_t hidden_dim = 300;  // per direction
    std::size_t ff_hidden = 600;
    int window = 2;
    // POS/chunk/dependency inputs and the B_ij block. Off = end-to-end mode.
    bool external_features = true;
    // Take V(e_i), V(t_j) (trigger-side entity label, argument-side event label)
    // instead of V(e_j), V(t_i).
    bool literal_indexing = false;
    std::size_t bij_width = 1000;
    double init_range = kWeightInitRange;
    // Probability of replacing a training-corpus singleton by <unk> while training.
    double singleton_unk_rate = 0.5;

    json to_json() const {
        return {{"embed_dim", embed_dim},
                {"hidden_dim", hidden_dim},
                {"ff_hidden", ff_hidden},
                {"window", window},
                {"external_features", external_features},
                {"literal_indexing", literal_indexing},
                {"bij_width", bij_width},
                {"init_range", init_range},
                {"singleton_unk_rate", singleton_unk_rate}};
    }

    // Missing keys keep their defaults.
    static ModelConfig from_json(const json& j) {
        ModelConfig c;
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.ff_hidden = j.value("ff_hidden", c.ff_hidden);
        c.window = j.value("window", c.window);
        c.external_features = j.value("external_features", c.external_features);
        c.literal_indexing = j.value("literal_indexing", c.literal_indexing);
        c.bij_width = j.value("bij_width", c.bij_width);
        c.init_range = j.value("init_range", c.init_range);
        c.singleton_unk_rate = j.value("singleton_unk_rate", c.singleton_unk_rate);
        return c;
    }
};

struct LossWeights {
    double alpha = 0.5;  // entity mentions
    double beta = 1.0;   // triggers
    double gamma = 0.5;  // argument roles
};

// Everything that varies between a training and an inference forward pass.
struct ForwardContext {
    Dropout dropout;
    Rng* rng = nullptr;  // drives singleton -> <unk> replacement; null disables it
    double singleton_unk_rate = 0.0;

    static ForwardContext inference() { return {}; }

    static ForwardContext training(Rng& rng, double dropout, double unk_rate) {
        return {Dropout{dropout, &rng}, &rng, unk_rate};
    }
};

struct ClassificationTerm {
    Tensor logits;
    std::size_t target = 0;
};

struct LossTerms {
    Tensor total;
    Tensor entity;    // sum of EMD negative log-likelihoods
    Tensor trigger;   // sum of ED negative log-likelihoods
    Tensor argument;  // sum of ARP negative log-likelihoods
};

// C* = alpha * L_E + beta * L_T + gamma * L_A, each L a sum of
// cross-entropies over its decisions (zero when there are none).
inline LossTerms assemble_joint_loss(Tape& tape, std::span<const ClassificationTerm> entity,
                                     std::span<const ClassificationTerm> trigger,
                                     std::span<const ClassificationTerm> argument,
                                     const LossWeights& weights) {
    auto component = [&tape](std::span<const ClassificationTerm> terms) {
        if (terms.empty()) return Tensor::scalar(0.0);
        std::vector<Tensor> nll;
        nll.reserve(terms.size());
        for (const auto& t : terms) nll.push_back(tape.cross_entropy(t.logits, t.target));
        return tape.sum(nll);
    };
    LossTerms out;
    out.entity = component(entity);
    out.trigger = component(trigger);
    out.argument = component(argument);
    const std::vector<Tensor> weighted{tape.scale(out.entity, weights.alpha),
                                       tape.scale(out.trigger, weights.beta),
                                       tape.scale(out.argument, weights.gamma)};
    out.total = tape.sum(weighted);
    return out;
}

// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> xs) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < xs.size(); ++k) {
        if (xs[k] > xs[best]) best = k;
    }
    return best;
}

inline std::vector<double> log_softmax_values(std::span<const double> xs) {
    const double m = *std::ranges::max_element(xs);
    double z = 0.0;
    for (double v : xs) z += std::exp(v - m);
    const double lse = m + std::log(z);
    std::vector<double> out(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) out[k] = xs[k] - lse;
    return out;
}

// Per-token tensors of one encoded sentence.
struct EncodedSentence {
    std::vector<Tensor> embeddings;  // d_i (after input dropout)
    std::vector<Tensor> context;     // D_i
    std::vector<Tensor> hidden;      // h_i, shared by all three heads
    std::vector<Tensor> token_repr;  // [h_i, D_i], input of the EMD and ED heads
};

struct Prediction {
    std::vector<std::size_t> entity_tags;
    std::vector<std::size_t> event_types;
    Sentence sentence;  // tokens plus predicted mentions and events
    std::size_t arp_evaluations = 0;
};

// Embeddings, shared BiGRU encoder and the EMD, ED and ARP heads. Parameters
// are tensor handles: copying a model shares their storage.
class JointModel {
public:
    JointModel(LabelSchema schema, Vocabulary vocab, BinaryFeatureEncoder features,
               const ModelConfig& config, Rng& rng, std::optional<EmbeddingTable> embeddings = {})
        : schema_(std::move(schema)),
          vocab_(std::move(vocab)),
          features_(std::move(features)),
          config_(config),
          bij_(config.bij_width, config.window, config.external_features),
          transitions_(TransitionMatrix::for_schema(schema_)) {
        if (config_.window < 0) throw ContractError("window must be non-negative");
        if (!config_.external_features) features_.set_enabled(false);
        if (embeddings) {
            if (embeddings->table.rows() != vocab_.size() || embeddings->dim() != config_.embed_dim) {
                throw DimensionError("embedding table " + shape_string(embeddings->table.shape()) +
                                     " does not match vocabulary/config");
            }
            embeddings_ = embeddings->table;
        } else {
            embeddings_ = random_embeddings(vocab_, config_.embed_dim, rng).table;
        }
        gru_ = GruParams::make(input_width(), config_.hidden_dim, config_.init_range, rng);
        emd_ = FeedForward::make("emd", token_repr_width(), config_.ff_hidden, schema_.bio_count(),
                                 config_.init_range, rng);
        ed_ = FeedForward::make("ed", token_repr_width(), config_.ff_hidden, schema_.event_count(),
                                config_.init_range, rng);
        arp_ = FeedForward::make("arp", arp_layout().width(), config_.ff_hidden, schema_.role_count(),
                                 config_.init_range, rng);
    }

    const LabelSchema& schema() const { return schema_; }
    const Vocabulary& vocabulary() const { return vocab_; }
    const BinaryFeatureEncoder& features() const { return features_; }
    const BijFeatureExtractor& bij_features() const { return bij_; }
    const ModelConfig& config() const { return config_; }
    const TransitionMatrix& transitions() const { return transitions_; }
    const GruParams& encoder() const { return gru_; }
    const FeedForward& entity_head() const { return emd_; }
    const FeedForward& trigger_head() const { return ed_; }
    const FeedForward& argument_head() const { return arp_; }
    const Tensor& embeddings() const { return embeddings_; }

    std::size_t input_width() const { return config_.embed_dim + features_.width(); }
    std::size_t context_width() const {
        return (2 * static_cast<std::size_t>(config_.window) + 1) * config_.embed_dim;
    }
    std::size_t token_repr_width() const { return gru_output_width() + context_width(); }
    std::size_t gru_output_width() const { return 2 * config_.hidden_dim; }

    ArpLayout arp_layout() const {
        return {gru_output_width(),       context_width(),
                schema_.bio_count(),      schema_.event_count(),
                schema_.event_count() + schema_.role_count(), bij_.width()};
    }

    // Fixed order: embeddings, encoder, EMD head, ED head, ARP head.
    std::vector<Tensor> parameters() const {
        std::vector<Tensor> out{embeddings_};
        for (auto group : {gru_.parameters(), emd_.parameters(), ed_.parameters(), arp_.parameters()}) {
            out.insert(out.end(), group.begin(), group.end());
        }
        return out;
    }

    // Weight matrices subject to norm rescaling (everything rank-2 except
    // the embedding table).
    std::vector<Tensor> weight_matrices() const {
        std::vector<Tensor> out;
        for (const auto& p : parameters()) {
            if (p.is_matrix() && !p.same_storage(embeddings_)) out.push_back(p);
        }
        return out;
    }

    EncodedSentence encode(Tape& tape, const Sentence& s, const ForwardContext& ctx) const {
        const std::size_t n = s.size();
        if (n == 0) throw ContractError("encode: empty sentence");
        EncodedSentence enc;
        enc.embeddings.reserve(n);
        std::vector<Tensor> inputs;
        inputs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t idx = vocab_.index(s.tokens[i]);
            if (ctx.rng && ctx.singleton_unk_rate > 0.0 && idx != Vocabulary::kUnk &&
                vocab_.count(idx) == 1 && ctx.rng->bernoulli(ctx.singleton_unk_rate)) {
                idx = Vocabulary::kUnk;
            }
            Tensor d = ctx.dropout.apply(tape, tape.row(embeddings_, idx));
            enc.embeddings.push_back(d);
            if (features_.enabled()) {
                inputs.push_back(tape.concat({d, Tensor::constant(features_.encode(s, i))}));
            } else {
                inputs.push_back(d);
            }
        }
        enc.hidden = encode_bidirectional(tape, gru_, inputs);
        for (std::size_t i = 0; i < n; ++i) {
            enc.context.push_back(local_context(tape, enc.embeddings, i, config_.window, config_.embed_dim));
            enc.token_repr.push_back(tape.concat({enc.hidden[i], enc.context[i]}));
        }
        return enc;
    }

    Tensor entity_logits(Tape& tape, const EncodedSentence& enc, std::size_t i,
                         const ForwardContext& ctx) const {
        return emd_.logits(tape, enc.token_repr[i], ctx.dropout);
    }

    Tensor trigger_logits(Tape& tape, const EncodedSentence& enc, std::size_t i,
                          const ForwardContext& ctx) const {
        return ed_.logits(tape, enc.token_repr[i], ctx.dropout);
    }

    // R^ARP_ij. `entity_tags` and `event_types` are the label sequences in
    // force: gold while training, predictions at inference.
    Tensor arp_input(Tape& tape, const EncodedSentence& enc, const Sentence& s, std::size_t i,
                     std::size_t j, std::span<const std::size_t> entity_tags,
                     std::span<const std::size_t> event_types, const MemoryVector& memory) const {
        if (i == j) throw ContractError("arp_input: trigger and argument positions coincide");
        const std::size_t entity_label = config_.literal_indexing ? entity_tags[i] : entity_tags[j];
        const std::size_t event_label = config_.literal_indexing ? event_types[j] : event_types[i];
        return build_arp_features(tape, arp_layout(), enc.hidden[i], enc.context[i], enc.hidden[j],
                                  enc.context[j], entity_label, event_label, memory,
                                  bij_.extract(s, i, j));
    }

    Tensor argument_logits(Tape& tape, const Tensor& arp_repr, const ForwardContext& ctx) const {
        return arp_.logits(tape, arp_repr, ctx.dropout);
    }

    // Teacher-forced argument-role inputs in scan order, paired with their
    // gold role. Only (gold trigger, gold mention-begin) cells appear.
    std::vector<std::pair<Tensor, std::size_t>> teacher_forced_arp_inputs(
        Tape& tape, const EncodedSentence& enc, const Sentence& s, const GoldLabels& gold) const {
        std::vector<std::pair<Tensor, std::size_t>> out;
        MemoryVector memory(schema_.event_count(), schema_.role_count());
        const std::size_t n = s.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = gold.event_types[i];
            if (t == 0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || !LabelSchema::is_begin(gold.entity_tags[j])) continue;
                out.emplace_back(arp_input(tape, enc, s, i, j, gold.entity_tags, gold.event_types, memory),
                                 gold.arguments.at(i, j));
            }
            memory.mark_event(t);
            for (std::size_t role : gold.arguments.row(i)) memory.mark_role(role);
        }
        return out;
    }

    // Weighted joint negative log-likelihood under teacher forcing. Heads
    // whose weight is exactly zero are not evaluated.
    LossTerms loss(Tape& tape, const Sentence& s, const GoldLabels& gold, const LossWeights& weights,
                   const ForwardContext& ctx) const {
        const EncodedSentence enc = encode(tape, s, ctx);
        std::vector<ClassificationTerm> entity, trigger, argument;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (weights.alpha != 0.0) entity.push_back({entity_logits(tape, enc, i, ctx), gold.entity_tags[i]});
            if (weights.beta != 0.0) trigger.push_back({trigger_logits(tape, enc, i, ctx), gold.event_types[i]});
        }
        if (weights.gamma != 0.0) {
            for (auto& [repr, role] : teacher_forced_arp_inputs(tape, enc, s, gold)) {
                argument.push_back({argument_logits(tape, repr, ctx), role});
            }
        }
        return assemble_joint_loss(tape, entity, trigger, argument, weights);
    }

    LossTerms loss(Tape& tape, const Sentence& s, const LossWeights& weights,
                   const ForwardContext& ctx) const {
        return loss(tape, s, gold_labels(s, schema_), weights, ctx);
    }

    // Per-token EMD log-probabilities, the Viterbi emissions.
    std::vector<std::vector<double>> entity_log_probs(Tape& tape, const EncodedSentence& enc) const {
        const auto ctx = ForwardContext::inference();
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < enc.hidden.size(); ++i) {
            out.push_back(log_softmax_values(entity_logits(tape, enc, i, ctx).values()));
        }
        return out;
    }

    std::vector<std::size_t> decode_entities(Tape& tape, const EncodedSentence& enc) const {
        return viterbi_decode(entity_log_probs(tape, enc), transitions_);
    }

    // Left-to-right trigger and argument decoding given entity tags E^P.
    Prediction decode_events(Tape& tape, const EncodedSentence& enc, const Sentence& s,
                             std::vector<std::size_t> entity_tags) const {
        const auto ctx = ForwardContext::inference();
        const std::size_t n = s.size();
        Prediction pred;
        pred.entity_tags = std::move(entity_tags);
        pred.event_types.assign(n, 0);
        pred.sentence.tokens = s.tokens;
        pred.sentence.pos = s.pos;
        pred.sentence.chunk = s.chunk;
        pred.sentence.deps = s.deps;
        pred.sentence.entities = tags_to_mentions(pred.entity_tags, schema_);
        std::map<std::size_t, std::size_t> mention_at;
        for (std::size_t m = 0; m < pred.sentence.entities.size(); ++m) {
            mention_at[pred.sentence.entities[m].start] = m;
        }

        MemoryVector memory(schema_.event_count(), schema_.role_count());
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = argmax(trigger_logits(tape, enc, i, ctx).values());
            pred.event_types[i] = t;
            if (t == 0) continue;
            Event ev{i, schema_.event_types()[t], {}};
            std::vector<std::size_t> roles;
            for (const auto& [j, mention] : mention_at) {
                if (j == i) continue;
                Tensor repr = arp_input(tape, enc, s, i, j, pred.entity_tags, pred.event_types, memory);
                const std::size_t role = argmax(argument_logits(tape, repr, ctx).values());
                ++pred.arp_evaluations;
                roles.push_back(role);
                if (role != 0) ev.arguments.push_back({mention, schema_.roles()[role]});
            }
            const MemoryVector before = memory;
            memory.mark_event(t);
            for (std::size_t role : roles) memory.mark_role(role);
            if (!memory.contains(before)) throw ContractError("memory vector lost a bit");
            pred.sentence.events.push_back(std::move(ev));
        }
        return pred;
    }

    Prediction predict(const Sentence& s) const {
        Tape tape;
        const EncodedSentence enc = encode(tape, s, ForwardContext::inference());
        return decode_events(tape, enc, s, decode_entities(tape, enc));
    }

    // Event decoding with externally supplied entity tags.
    Prediction predict_with_entities(const Sentence& s, std::vector<std::size_t> entity_tags) const {
        Tape tape;
        const EncodedSentence enc = encode(tape, s, ForwardContext::inference());
        return decode_events(tape, enc, s, std::move(entity_tags));
    }

    std::vector<std::size_t> predict_entities(const Sentence& s) const {
        Tape tape;
        const EncodedSentence enc = encode(tape, s, ForwardContext::inference());
        return decode_entities(tape, enc);
    }

private:
    LabelSchema schema_;
    Vocabulary vocab_;
    BinaryFeatureEncoder features_;
    ModelConfig config_;
    BijFeatureExtractor bij_;
    TransitionMatrix transitions_;
    Tensor embeddings_;
    GruParams gru_;
    FeedForward emd_, ed_, arp_;
};

// Copies of parameter values, for model selection and comparisons.
class ParameterSnapshot {
public:
    ParameterSnapshot() = default;
    explicit ParameterSnapshot(std::span<const Tensor> params) {
        for (const auto& p : params) values_.emplace_back(p.values().begin(), p.values().end());
    }

    void restore(std::span<Tensor> params) const {
        if (params.size() != values_.size()) throw DimensionError("snapshot: parameter count mismatch");
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto dst = params[k].mutable_values();
            if (dst.size() != values_[k].size()) throw DimensionError("snapshot: parameter size mismatch");
            std::ranges::copy(values_[k], dst.begin());
        }
    }

    bool empty() const { return values_.empty(); }

private:
    std::vector<std::vector<double>> values_;
};

// Entity model and event model trained separately, each with its own
// encoder; the event model consumes the entity model's decoded tags.
struct PipelinedModel {
    JointModel entity_model;
    JointModel event_model;

    Prediction predict(const Sentence& s) const {
        return event_model.predict_with_entities(s, entity_model.predict_entities(s));
    }
};

template <typename Model>
std::vector<Sentence> predict_corpus(const Model& model, std::span<const Sentence> corpus) {
    std::vector<Sentence> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back(model.predict(s).sentence);
    return out;
}

}  // namespace joint3ee
