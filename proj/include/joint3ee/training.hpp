#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "model.hpp"
#include "random.hpp"

namespace joint3ee {

struct TrainConfig {
    LossWeights weights;
    std::size_t batch_size = 50;
    double frobenius_cap = 3.0;
    double dropout = 0.5;
    double rho = 0.95;
    double epsilon = 1e-6;
    std::size_t epochs = 50;
    std::uint64_t seed = 1;

    void validate() const {
        if (weights.alpha < 0 || weights.beta < 0 || weights.gamma < 0) {
            throw ContractError("loss weights must be non-negative");
        }
        if (batch_size == 0) throw ContractError("batch size must be positive");
        if (frobenius_cap <= 0) throw ContractError("Frobenius cap must be positive");
        if (dropout < 0 || dropout >= 1) throw ContractError("dropout must lie in [0, 1)");
        if (rho <= 0 || rho >= 1 || epsilon <= 0) throw ContractError("bad Adadelta constants");
    }

    json to_json() const {
        return {{"alpha", weights.alpha},  {"beta", weights.beta},
                {"gamma", weights.gamma},  {"batch_size", batch_size},
                {"frobenius_cap", frobenius_cap}, {"dropout", dropout},
                {"rho", rho},              {"epsilon", epsilon},
                {"epochs", epochs},        {"seed", seed}};
    }

    static TrainConfig from_json(const json& j) {
        TrainConfig c;
        c.weights.alpha = j.value("alpha", c.weights.alpha);
        c.weights.beta = j.value("beta", c.weights.beta);
        c.weights.gamma = j.value("gamma", c.weights.gamma);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.frobenius_cap = j.value("frobenius_cap", c.frobenius_cap);
        c.dropout = j.value("dropout", c.dropout);
        c.rho = j.value("rho", c.rho);
        c.epsilon = j.value("epsilon", c.epsilon);
        c.epochs = j.value("epochs", c.epochs);
        c.seed = j.value("seed", c.seed);
        return c;
    }
};

// Running averages E[g^2] and E[dx^2] for one parameter.
struct AdadeltaState {
    std::vector<double> mean_sq_grad;
    std::vector<double> mean_sq_update;

    explicit AdadeltaState(std::size_t n = 0) : mean_sq_grad(n, 0.0), mean_sq_update(n, 0.0) {}
};

inline void adadelta_update(std::span<double> param, std::span<const double> grad, AdadeltaState& state,
                            double rho, double epsilon) {
    if (param.size() != grad.size() || state.mean_sq_grad.size() != param.size()) {
        throw DimensionError("adadelta_update: parameter, gradient and state sizes differ");
    }
    for (std::size_t k = 0; k < param.size(); ++k) {
        const double g = grad[k];
        double& eg = state.mean_sq_grad[k];
        double& ex = state.mean_sq_update[k];
        eg = rho * eg + (1.0 - rho) * g * g;
        const double delta = -(std::sqrt(ex + epsilon) / std::sqrt(eg + epsilon)) * g;
        ex = rho * ex + (1.0 - rho) * delta * delta;
        param[k] += delta;
    }
}

class Adadelta {
public:
    Adadelta(double rho, double epsilon) : rho_(rho), epsilon_(epsilon) {}

    // One update of every parameter from its accumulated gradient.
    void step(std::span<Tensor> params) {
        if (states_.empty()) {
            for (const auto& p : params) states_.emplace_back(p.size());
        }
        if (states_.size() != params.size()) throw DimensionError("Adadelta: parameter set changed");
        for (std::size_t k = 0; k < params.size(); ++k) {
            adadelta_update(params[k].mutable_values(), params[k].grad(), states_[k], rho_, epsilon_);
        }
    }

    const std::vector<AdadeltaState>& states() const { return states_; }

private:
    double rho_, epsilon_;
    std::vector<AdadeltaState> states_;
};

inline double frobenius_norm(std::span<const double> values) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    return std::sqrt(sq);
}

// Projects W back onto the ball ||W||_F <= cap. Returns true if scaled.
inline bool rescale_frobenius(std::span<double> values, double cap) {
    if (cap <= 0) throw ContractError("rescale_frobenius: cap must be positive");
    const double norm = frobenius_norm(values);
    if (norm <= cap) return false;
    const double factor = cap / norm;
    for (double& v : values) v *= factor;
    return true;
}

inline bool rescale_frobenius(Tensor& weight, double cap) {
    return rescale_frobenius(weight.mutable_values(), cap);
}

struct EpochLog {
    std::size_t epoch = 0;
    double mean_loss = 0.0;  // mean C* per sentence, under training-time dropout
    std::size_t batches = 0;

    bool operator==(const EpochLog&) const = default;
};

struct TrainHooks {
    // Called after every batch update (after rescaling).
    std::function<void(const JointModel&)> after_batch;
    // Called after every epoch; returning false stops training.
    std::function<bool(const EpochLog&)> after_epoch;
};

// Mini-batch training: per epoch the corpus is shuffled under the seed,
// gradients are summed over a batch in sentence order and divided by the
// batch length, then one Adadelta step and the norm rescaling follow.
inline std::vector<EpochLog> train(JointModel& model, std::span<const Sentence> corpus,
                                   const TrainConfig& config, const TrainHooks& hooks = {}) {
    config.validate();
    if (corpus.empty()) throw ContractError("train: empty corpus");
    std::vector<GoldLabels> gold;
    gold.reserve(corpus.size());
    for (const auto& s : corpus) gold.push_back(gold_labels(s, model.schema()));

    std::vector<Tensor> params = model.parameters();
    std::vector<Tensor> matrices = model.weight_matrices();
    Adadelta optimizer(config.rho, config.epsilon);
    Rng rng(config.seed);
    const ForwardContext ctx =
        ForwardContext::training(rng, config.dropout, model.config().singleton_unk_rate);

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = std::min(config.batch_size, corpus.size());

    std::vector<EpochLog> log;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double total = 0.0;
        EpochLog entry{epoch, 0.0, 0};
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(start + batch, order.size());
            for (auto& p : params) p.zero_grad();
            for (std::size_t k = start; k < stop; ++k) {
                Tape tape;
                const auto idx = order[k];
                LossTerms terms = model.loss(tape, corpus[idx], gold[idx], config.weights, ctx);
                total += terms.total.item();
                tape.backward(terms.total);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& p : params) {
                for (double& g : p.grad()) g *= inv;
            }
            optimizer.step(params);
            for (auto& w : matrices) rescale_frobenius(w, config.frobenius_cap);
            ++entry.batches;
            if (hooks.after_batch) hooks.after_batch(model);
        }
        entry.mean_loss = total / static_cast<double>(corpus.size());
        log.push_back(entry);
        if (hooks.after_epoch && !hooks.after_epoch(entry)) break;
    }
    for (auto& p : params) p.zero_grad();
    return log;
}

// Mean C* without dropout.
inline double evaluate_loss(const JointModel& model, std::span<const Sentence> corpus,
                            const LossWeights& weights) {
    if (corpus.empty()) return 0.0;
    double total = 0.0;
    for (const auto& s : corpus) {
        Tape tape;
        total += model.loss(tape, s, weights, ForwardContext::inference()).total.item();
    }
    return total / static_cast<double>(corpus.size());
}

struct ModelInputs {
    LabelSchema schema;
    Vocabulary vocab;
    BinaryFeatureEncoder features;
};

inline ModelInputs fit_inputs(std::span<const Sentence> corpus, const ModelConfig& config) {
    return {LabelSchema::from_corpus(corpus), Vocabulary::build(corpus),
            BinaryFeatureEncoder::fit(corpus, config.external_features)};
}

// Entity model trained on the EMD term alone and an event model with its
// own encoder trained on the ED and ARP terms alone.
inline PipelinedModel train_pipelined(const ModelInputs& inputs, std::span<const Sentence> corpus,
                                      const ModelConfig& model_config, const TrainConfig& config,
                                      std::uint64_t init_seed) {
    Rng entity_rng(init_seed);
    Rng event_rng(init_seed + 1);
    PipelinedModel pipeline{
        JointModel(inputs.schema, inputs.vocab, inputs.features, model_config, entity_rng),
        JointModel(inputs.schema, inputs.vocab, inputs.features, model_config, event_rng)};
    TrainConfig entity_config = config;
    entity_config.weights = {config.weights.alpha, 0.0, 0.0};
    TrainConfig event_config = config;
    event_config.weights = {0.0, config.weights.beta, config.weights.gamma};
    event_config.seed = config.seed + 1;
    train(pipeline.entity_model, corpus, entity_config);
    train(pipeline.event_model, corpus, event_config);
    return pipeline;
}

}  // namespace joint3ee
