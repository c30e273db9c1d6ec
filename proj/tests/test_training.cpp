#include <gtest/gtest.h>

#include <cmath>

#include "joint3ee/diagnostics.hpp"
#include "joint3ee/synthetic.hpp"
#include "joint3ee/training.hpp"

using namespace joint3ee;

namespace {

ModelConfig small_config() {
    ModelConfig c;
    c.embed_dim = 6;
    c.hidden_dim = 4;
    c.ff_hidden = 5;
    return c;
}

JointModel make_model(std::span<const Sentence> corpus, const ModelConfig& config, std::uint64_t seed = 3) {
    Rng rng(seed);
    return JointModel(LabelSchema::from_corpus(corpus), Vocabulary::build(corpus),
                      BinaryFeatureEncoder::fit(corpus), config, rng);
}

void zero(const Tensor& t) {
    Tensor copy = t;
    for (double& v : copy.mutable_values()) v = 0.0;
}

std::vector<std::vector<double>> snapshot(const JointModel& m) {
    std::vector<std::vector<double>> out;
    for (const auto& p : m.parameters()) out.emplace_back(p.values().begin(), p.values().end());
    return out;
}

ClassificationTerm confident(std::size_t k, std::size_t target) {
    std::vector<double> logits(k, -1000.0);
    logits[target] = 0.0;
    return {Tensor::constant(logits), target};
}

}  // namespace

TEST(JointLoss, UniformHeadsGiveLogClassCounts) {
    const std::vector<Sentence> corpus{running_example()};
    const auto m = make_model(corpus, small_config());
    for (const auto& head : {m.entity_head(), m.trigger_head(), m.argument_head()}) {
        zero(head.output_weight);
        zero(head.output_bias);
    }
    // 6 tokens, 5 BIO tags, 2 event labels, 3 roles, 2 gold (trigger, begin) pairs
    const double want = 0.5 * 6 * std::log(5.0) + 1.0 * 6 * std::log(2.0) + 0.5 * 2 * std::log(3.0);
    Tape tape;
    const auto terms = m.loss(tape, corpus[0], LossWeights{}, ForwardContext::inference());
    EXPECT_NEAR(terms.total.item(), want, 1e-12);
    EXPECT_NEAR(terms.entity.item(), 6 * std::log(5.0), 1e-12);
    EXPECT_NEAR(terms.trigger.item(), 6 * std::log(2.0), 1e-12);
    EXPECT_NEAR(terms.argument.item(), 2 * std::log(3.0), 1e-12);
}

TEST(JointLoss, PerfectConfidenceIsZero) {
    const std::vector<ClassificationTerm> e{confident(5, 3), confident(5, 0)};
    const std::vector<ClassificationTerm> t{confident(2, 1)};
    const std::vector<ClassificationTerm> a{confident(3, 2), confident(3, 0)};
    Tape tape;
    EXPECT_EQ(assemble_joint_loss(tape, e, t, a, LossWeights{}).total.item(), 0.0);
}

TEST(JointLoss, EmptyComponentsAreZero) {
    Tape tape;
    const auto terms = assemble_joint_loss(tape, {}, {}, {}, LossWeights{});
    EXPECT_EQ(terms.total.item(), 0.0);
}

TEST(JointLoss, WeightedDecompositionAndLinearity) {
    const std::vector<Sentence> corpus{running_example()};
    const auto m = make_model(corpus, small_config(), 9);
    auto terms_for = [&](LossWeights w) {
        Tape tape;
        const auto t = m.loss(tape, corpus[0], w, ForwardContext::inference());
        return std::array<double, 4>{t.total.item(), t.entity.item(), t.trigger.item(), t.argument.item()};
    };
    const auto base = terms_for({0.5, 1.0, 0.5});
    EXPECT_NEAR(base[0], 0.5 * base[1] + 1.0 * base[2] + 0.5 * base[3], 1e-12);
    for (double gamma : {0.0, 0.25, 2.0, 7.0}) {
        const auto t = terms_for({0.5, 1.0, gamma});
        EXPECT_NEAR(t[0] - base[0], (gamma - 0.5) * base[3], 1e-10) << gamma;
    }
    const auto only_args = terms_for({0.0, 0.0, 1.0});
    EXPECT_NEAR(only_args[0], base[3], 1e-12);
}

TEST(Adadelta, ZeroGradientLeavesParameter) {
    std::vector<double> p{1.5, -2.0};
    const std::vector<double> g{0.0, 0.0};
    AdadeltaState s(2);
    adadelta_update(p, g, s, 0.95, 1e-6);
    EXPECT_EQ(p, (std::vector<double>{1.5, -2.0}));
    EXPECT_EQ(s.mean_sq_grad, (std::vector<double>{0.0, 0.0}));
}

TEST(Adadelta, FirstStepValue) {
    std::vector<double> p{0.0};
    const std::vector<double> g{1.0};
    AdadeltaState s(1);
    adadelta_update(p, g, s, 0.95, 1e-6);
    // -sqrt(eps) / sqrt(0.05 + eps)
    EXPECT_NEAR(p[0], -0.004472, 1e-6);
    EXPECT_NEAR(s.mean_sq_grad[0], 0.05, 1e-15);
    EXPECT_NEAR(s.mean_sq_update[0], 0.05 * p[0] * p[0], 1e-15);
}

TEST(Adadelta, NearlyScaleInvariant) {
    std::vector<double> a{0.0}, b{0.0};
    AdadeltaState sa(1), sb(1);
    Rng rng(6);
    for (int step = 0; step < 20; ++step) {
        const double g = rng.uniform(-1, 1);
        const std::vector<double> ga{g}, gb{1000.0 * g};
        adadelta_update(a, ga, sa, 0.95, 1e-12);
        adadelta_update(b, gb, sb, 0.95, 1e-12);
    }
    EXPECT_NEAR(a[0], b[0], 1e-6 * std::max(1.0, std::abs(a[0])));
}

TEST(Adadelta, SizeMismatchRejected) {
    std::vector<double> p{0.0, 0.0};
    const std::vector<double> g{1.0};
    AdadeltaState s(2);
    EXPECT_THROW(adadelta_update(p, g, s, 0.95, 1e-6), DimensionError);
}

TEST(Frobenius, ScalesWholeMatrix) {
    std::vector<double> w{4, 0, 0, 3};
    EXPECT_TRUE(rescale_frobenius(w, 3.0));
    EXPECT_NEAR(w[0], 2.4, 1e-15);
    EXPECT_NEAR(w[3], 1.8, 1e-15);
    EXPECT_EQ(w[1], 0.0);
    EXPECT_NEAR(frobenius_norm(w), 3.0, 1e-14);
}

TEST(Frobenius, AtOrBelowCapUntouched) {
    std::vector<double> w{0, 3, 0, 0};
    EXPECT_FALSE(rescale_frobenius(w, 3.0));
    EXPECT_EQ(w, (std::vector<double>{0, 3, 0, 0}));
    EXPECT_THROW(rescale_frobenius(w, 0.0), ContractError);
}

TEST(Frobenius, PostconditionOnRandomMatrices) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> w(1 + rng.index(40));
        for (double& v : w) v = rng.uniform(-5, 5);
        rescale_frobenius(w, 3.0);
        EXPECT_LE(frobenius_norm(w), 3.0 + 1e-12);
    }
}

TEST(Training, NormCapHoldsAfterEveryBatch) {
    const auto corpus = generate_synthetic_corpus({12, 2});
    auto m = make_model(corpus, small_config());
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 4;
    std::size_t batches = 0;
    TrainHooks hooks;
    hooks.after_batch = [&](const JointModel& model) {
        ++batches;
        for (const auto& w : model.weight_matrices()) {
            EXPECT_LE(frobenius_norm(w.values()), 3.0 + 1e-12) << w.name();
            EXPECT_FALSE(w.same_storage(model.embeddings()));
        }
    };
    const auto log = train(m, corpus, tc, hooks);
    EXPECT_EQ(batches, 9u);
    ASSERT_EQ(log.size(), 3u);
    EXPECT_EQ(log[0].batches, 3u);
}

TEST(Training, WeightMatricesExcludeBiasesAndEmbeddings) {
    const std::vector<Sentence> corpus{running_example()};
    const auto m = make_model(corpus, small_config());
    const auto mats = m.weight_matrices();
    EXPECT_EQ(mats.size(), 2u * 6u + 3u * 2u);  // six per GRU direction, two per head
    for (const auto& w : mats) EXPECT_TRUE(w.is_matrix()) << w.name();
}

TEST(Training, DeterministicUnderSeed) {
    const auto corpus = generate_synthetic_corpus({10, 5});
    auto run = [&] {
        auto m = make_model(corpus, small_config(), 21);
        TrainConfig tc;
        tc.epochs = 2;
        tc.batch_size = 3;
        tc.seed = 17;
        const auto log = train(m, corpus, tc);
        return std::make_pair(log, snapshot(m));
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
}

TEST(Training, BatchLargerThanCorpusIsOneBatch) {
    const auto corpus = generate_synthetic_corpus({3, 5});
    auto m = make_model(corpus, small_config());
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 50;
    const auto log = train(m, corpus, tc);
    EXPECT_EQ(log.at(0).batches, 1u);
}

// Gradients are averaged over the batch: a batch holding the same sentence
// twice makes exactly the update of a batch holding it once.
TEST(Training, BatchGradientIsMean) {
    auto config = small_config();
    config.singleton_unk_rate = 0.0;
    const Sentence s = running_example();
    const std::vector<Sentence> once{s}, twice{s, s};
    auto m1 = make_model(once, config, 4);
    auto m2 = make_model(once, config, 4);
    TrainConfig tc;
    tc.epochs = 1;
    tc.dropout = 0.0;
    tc.batch_size = 2;
    train(m1, once, tc);
    train(m2, twice, tc);
    const auto a = snapshot(m1), b = snapshot(m2);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = 0; i < a[k].size(); ++i) EXPECT_NEAR(a[k][i], b[k][i], 1e-12);
    }
}

TEST(Training, RejectsBadConfig) {
    const std::vector<Sentence> corpus{running_example()};
    auto m = make_model(corpus, small_config());
    TrainConfig tc;
    tc.batch_size = 0;
    EXPECT_THROW(train(m, corpus, tc), ContractError);
    tc = TrainConfig{};
    tc.weights.gamma = -1;
    EXPECT_THROW(train(m, corpus, tc), ContractError);
    EXPECT_THROW(train(m, std::vector<Sentence>{}, TrainConfig{}), ContractError);
}

TEST(Training, EarlyStopHook) {
    const std::vector<Sentence> corpus{running_example()};
    auto m = make_model(corpus, small_config());
    TrainConfig tc;
    tc.epochs = 10;
    TrainHooks hooks;
    hooks.after_epoch = [](const EpochLog& e) { return e.epoch < 3; };
    EXPECT_EQ(train(m, corpus, tc, hooks).size(), 3u);
}

TEST(Training, MemorizesSingleSentence) {
    const std::vector<Sentence> corpus{running_example()};
    ModelConfig config;
    config.embed_dim = 32;
    config.hidden_dim = 32;
    config.ff_hidden = 64;
    auto m = make_model(corpus, config, 1);
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 1;
    train(m, corpus, tc);
    EXPECT_LT(evaluate_loss(m, corpus, tc.weights), 0.01);
    const auto pred = m.predict(corpus[0]);
    EXPECT_EQ(pred.sentence.entities, corpus[0].entities);
    EXPECT_EQ(pred.sentence.events, corpus[0].events);
}

TEST(Training, PipelinedModelsAreSeparate) {
    const auto corpus = generate_synthetic_corpus({6, 2});
    const auto inputs = fit_inputs(corpus, small_config());
    TrainConfig tc;
    tc.epochs = 1;
    const auto p = train_pipelined(inputs, corpus, small_config(), tc, 5);
    const auto a = p.entity_model.parameters(), b = p.event_model.parameters();
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_FALSE(a[k].same_storage(b[k]));
    EXPECT_EQ(predict_corpus(p, corpus).size(), corpus.size());
}

TEST(GradientSuite, EndToEndModelGradients) {
    EXPECT_LT(run_gradient_suite().max_relative_error, 1e-4);
}

TEST(GradientSuite, LiteralIndexingAndAblatedConfigs) {
    auto literal = gradient_probe_config();
    literal.literal_indexing = true;
    EXPECT_LT(run_gradient_suite({}, literal).max_relative_error, 1e-4);
    auto ablated = gradient_probe_config();
    ablated.external_features = false;
    EXPECT_LT(run_gradient_suite({}, ablated).max_relative_error, 1e-4);
}

TEST(GradientSuite, BiasedAnalyticGradientIsCaught) {
    GradCheckOptions o;
    o.analytic_bias = 1e-3;
    o.max_coordinates_per_parameter = 3;
    const auto r = run_gradient_suite(o);
    EXPECT_GT(r.max_relative_error, 1e-4);
    EXPECT_FALSE(r.worst_parameter.empty());
}
