#include <gtest/gtest.h>

#include <cmath>

#include "joint3ee/gru.hpp"
#include "joint3ee/model.hpp"
#include "joint3ee/synthetic.hpp"

using namespace joint3ee;

namespace {

GruDirection zero_direction(std::size_t in, std::size_t hidden) {
    GruDirection d;
    d.Wz = Tensor::parameter("Wz", {hidden, in});
    d.Uz = Tensor::parameter("Uz", {hidden, hidden});
    d.bz = Tensor::parameter("bz", {hidden});
    d.Wr = Tensor::parameter("Wr", {hidden, in});
    d.Ur = Tensor::parameter("Ur", {hidden, hidden});
    d.br = Tensor::parameter("br", {hidden});
    d.Wh = Tensor::parameter("Wh", {hidden, in});
    d.Uh = Tensor::parameter("Uh", {hidden, hidden});
    d.bh = Tensor::parameter("bh", {hidden});
    return d;
}

std::vector<double> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

std::vector<Tensor> random_inputs(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<Tensor> xs;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.uniform(-1, 1);
        xs.push_back(Tensor::constant(v));
    }
    return xs;
}

// Plain-loop evaluation of the gate formulas.
std::vector<double> hand_cell(const GruDirection& p, const std::vector<double>& x, const std::vector<double>& h) {
    const std::size_t H = h.size(), I = x.size();
    auto lin = [&](const Tensor& W, const Tensor& U, const Tensor& b, const std::vector<double>& hh, std::size_t o) {
        double s = b[o];
        for (std::size_t k = 0; k < I; ++k) s += W[o * I + k] * x[k];
        for (std::size_t k = 0; k < H; ++k) s += U[o * H + k] * hh[k];
        return s;
    };
    std::vector<double> z(H), r(H), rh(H), out(H);
    for (std::size_t o = 0; o < H; ++o) {
        z[o] = 1.0 / (1.0 + std::exp(-lin(p.Wz, p.Uz, p.bz, h, o)));
        r[o] = 1.0 / (1.0 + std::exp(-lin(p.Wr, p.Ur, p.br, h, o)));
    }
    for (std::size_t k = 0; k < H; ++k) rh[k] = r[k] * h[k];
    for (std::size_t o = 0; o < H; ++o) {
        const double c = std::tanh(lin(p.Wh, p.Uh, p.bh, rh, o));
        out[o] = (1.0 - z[o]) * h[o] + z[o] * c;
    }
    return out;
}

}  // namespace

TEST(GruCell, ZeroWeightsHalveState) {
    const auto p = zero_direction(2, 3);
    Tape tape;
    auto h = gru_cell(tape, p, Tensor::constant({0.7, -0.2}), Tensor::constant({1.0, -2.0, 4.0}));
    EXPECT_EQ(vals(h), (std::vector<double>{0.5, -1.0, 2.0}));
}

TEST(GruCell, ZeroEverythingStaysZero) {
    const auto p = zero_direction(2, 3);
    Tape tape;
    auto h = gru_cell(tape, p, Tensor::constant({0.0, 0.0}), Tensor::constant({0.0, 0.0, 0.0}));
    EXPECT_EQ(vals(h), (std::vector<double>{0, 0, 0}));
}

TEST(GruCell, MatchesHandEvaluation) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        auto p = GruDirection::make("d", 4, 3, 0.8, rng);
        for (auto* b : {&p.bz, &p.br, &p.bh}) {
            for (double& v : b->mutable_values()) v = rng.uniform(-0.5, 0.5);
        }
        std::vector<double> x(4), h(3);
        for (double& v : x) v = rng.uniform(-1, 1);
        for (double& v : h) v = rng.uniform(-1, 1);
        Tape tape;
        const auto got = vals(gru_cell(tape, p, Tensor::constant(x), Tensor::constant(h)));
        const auto want = hand_cell(p, x, h);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
    }
}

TEST(GruCell, ShapeMismatchRejected) {
    const auto p = zero_direction(2, 3);
    Tape tape;
    EXPECT_THROW(gru_cell(tape, p, Tensor::constant({1.0}), Tensor::constant({0.0, 0.0, 0.0})), DimensionError);
}

TEST(BiGru, SingleTokenIsOneStepEachWay) {
    Rng rng(3);
    const auto params = GruParams::make(4, 3, 0.5, rng);
    const auto xs = random_inputs(rng, 1, 4);
    Tape tape;
    const auto H = encode_bidirectional(tape, params, xs);
    ASSERT_EQ(H.size(), 1u);
    const auto zero = Tensor::constant({0.0, 0.0, 0.0});
    auto fw = vals(gru_cell(tape, params.forward, xs[0], zero));
    const auto bw = vals(gru_cell(tape, params.backward, xs[0], zero));
    fw.insert(fw.end(), bw.begin(), bw.end());
    EXPECT_EQ(vals(H[0]), fw);
}

TEST(BiGru, ZeroParametersGiveZeroStates) {
    GruParams params{zero_direction(3, 2), zero_direction(3, 2)};
    Rng rng(1);
    Tape tape;
    for (const auto& h : encode_bidirectional(tape, params, random_inputs(rng, 5, 3))) {
        EXPECT_EQ(vals(h), (std::vector<double>{0, 0, 0, 0}));
    }
}

TEST(BiGru, EmptySentenceRejected) {
    Rng rng(1);
    const auto params = GruParams::make(3, 2, 0.1, rng);
    Tape tape;
    EXPECT_THROW(encode_bidirectional(tape, params, std::vector<Tensor>{}), ContractError);
}

// With tied directions, the forward half of H(X) is the backward half of
// H(reverse X), read in reverse.
TEST(BiGru, ReversalSwapsHalvesWhenTied) {
    Rng rng(8);
    const auto dir = GruDirection::make("tied", 4, 3, 0.5, rng);
    const GruParams tied{dir, dir};
    auto xs = random_inputs(rng, 6, 4);
    Tape tape;
    const auto H = encode_bidirectional(tape, tied, xs);
    std::ranges::reverse(xs);
    const auto R = encode_bidirectional(tape, tied, xs);
    const std::size_t n = H.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto h = vals(H[i]), r = vals(R[n - 1 - i]);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_EQ(h[k], r[3 + k]);
            EXPECT_EQ(h[3 + k], r[k]);
        }
    }
}

TEST(BiGru, EveryInputReachesOtherPositions) {
    Rng rng(12);
    const auto params = GruParams::make(4, 5, 0.5, rng);
    const auto xs = random_inputs(rng, 6, 4);
    Tape tape;
    const auto base = encode_bidirectional(tape, params, xs);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        auto perturbed = xs;
        std::vector<double> v = vals(xs[j]);
        v[0] += 0.5;
        perturbed[j] = Tensor::constant(v);
        const auto H = encode_bidirectional(tape, params, perturbed);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i == j) continue;
            EXPECT_NE(vals(H[i]), vals(base[i])) << "x_" << j << " does not reach h_" << i;
        }
    }
}

// All three heads read the same encoder states, so the argument loss alone
// already moves the encoder.
TEST(SharedRepresentation, ArgumentLossAloneReachesEncoder) {
    const std::vector<Sentence> corpus{running_example()};
    ModelConfig config;
    config.embed_dim = 6;
    config.hidden_dim = 4;
    config.ff_hidden = 5;
    Rng rng(2);
    JointModel model(LabelSchema::from_corpus(corpus), Vocabulary::build(corpus),
                     BinaryFeatureEncoder::fit(corpus), config, rng);
    for (auto& p : model.parameters()) p.zero_grad();
    Tape tape;
    const auto terms = model.loss(tape, corpus[0], LossWeights{0.0, 0.0, 1.0}, ForwardContext::inference());
    tape.backward(terms.total);
    for (const auto& p : model.encoder().parameters()) {
        double norm = 0.0;
        for (double g : p.grad()) norm += g * g;
        EXPECT_GT(norm, 0.0) << p.name();
    }
    for (const auto& p : model.entity_head().parameters()) {
        for (double g : p.grad()) EXPECT_EQ(g, 0.0) << p.name();
    }
}
