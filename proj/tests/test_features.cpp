#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "joint3ee/features.hpp"
#include "joint3ee/model.hpp"
#include "joint3ee/synthetic.hpp"

using namespace joint3ee;

namespace {

std::size_t ones(const std::vector<double>& v, std::size_t from, std::size_t to) {
    return static_cast<std::size_t>(std::accumulate(v.begin() + from, v.begin() + to, 0.0));
}

std::vector<Tensor> embedding_rows(std::size_t n, std::size_t dim) {
    std::vector<Tensor> rows;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (std::size_t k = 0; k < dim; ++k) v[k] = 10.0 * (i + 1) + k;
        rows.push_back(Tensor::constant(v));
    }
    return rows;
}

}  // namespace

TEST(Vocabulary, UnkAtZeroAndDenseIndices) {
    const auto v = Vocabulary::build(std::vector<Sentence>{running_example()});
    EXPECT_EQ(v.word(0), "<unk>");
    EXPECT_EQ(v.size(), 7u);
    EXPECT_EQ(v.index("never-seen"), Vocabulary::kUnk);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.index(v.word(i)), i);
    EXPECT_EQ(v.count(v.index("hit")), 1u);
    const auto back = Vocabulary::from_json(v.to_json());
    EXPECT_EQ(back.words(), v.words());
}

TEST(BinaryFeatures, DisabledEncoderGivesEmbeddingOnlyInput) {
    const std::vector<Sentence> corpus{running_example()};
    ModelConfig config;  // 300-dimensional embeddings
    config.external_features = false;
    Rng rng(1);
    JointModel model(LabelSchema::from_corpus(corpus), Vocabulary::build(corpus),
                     BinaryFeatureEncoder::fit(corpus), config, rng);
    EXPECT_EQ(model.input_width(), 300u);
    EXPECT_EQ(model.features().width(), 0u);
}

TEST(BinaryFeatures, OneActiveBitPerSubBlock) {
    Sentence s;
    s.tokens = {"soldiers", "fired"};
    s.pos = {"NN", "VBD"};
    s.chunk = {"B-NP", "B-VP"};
    s.deps = {{1, "nsubj"}, {-1, "root"}};
    const auto enc = BinaryFeatureEncoder::fit(std::vector<Sentence>{s});
    const auto x = enc.encode(s, 0);
    ASSERT_EQ(x.size(), enc.width());
    EXPECT_EQ(ones(x, 0, x.size()), 3u);
    EXPECT_EQ(ones(x, 0, enc.pos_width()), 1u);
    EXPECT_EQ(ones(x, enc.pos_width(), enc.pos_width() + enc.chunk_width()), 1u);
    EXPECT_EQ(ones(x, enc.pos_width() + enc.chunk_width(), x.size()), 1u);
}

TEST(BinaryFeatures, TwoDistinctRelationsGiveTwoBits) {
    const Sentence s = running_example();  // "warthog": compound head, nsubjpass dependent
    const auto enc = BinaryFeatureEncoder::fit(std::vector<Sentence>{s});
    const auto x = enc.encode(s, 2);
    const std::size_t base = enc.pos_width() + enc.chunk_width();
    // own edge nsubjpass plus the det and compound edges it heads
    EXPECT_EQ(ones(x, base, x.size()), 3u);
    const auto y = enc.encode(s, 5);  // "today": tmod only
    EXPECT_EQ(ones(y, base, y.size()), 1u);

    Sentence t;
    t.tokens = {"a", "b", "c"};
    t.deps = {{1, "amod"}, {-1, "root"}, {1, "dobj"}};
    const auto enc2 = BinaryFeatureEncoder::fit(std::vector<Sentence>{t});
    const auto z = enc2.encode(t, 1);
    EXPECT_EQ(ones(z, 0, z.size()), 2u);
}

TEST(BinaryFeatures, UnseenTagsEncodeAsZeros) {
    const auto enc = BinaryFeatureEncoder::fit(std::vector<Sentence>{running_example()});
    Sentence s;
    s.tokens = {"x"};
    s.pos = {"UH"};
    s.chunk = {"B-INTJ"};
    s.deps = {{-1, "root"}};
    const auto x = enc.encode(s, 0);
    EXPECT_EQ(x.size(), enc.width());
    EXPECT_EQ(ones(x, 0, x.size()), 0u);
}

TEST(BinaryFeatures, WidthIsFixedAcrossTokens) {
    const auto corpus = generate_synthetic_corpus({100, 4});
    const auto enc = BinaryFeatureEncoder::fit(corpus);
    Sentence bare;
    bare.tokens = {"nothing", "here"};
    for (const auto& s : corpus) {
        for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(enc.encode(s, i).size(), enc.width());
    }
    EXPECT_EQ(enc.encode(bare, 1).size(), enc.width());
}

TEST(BinaryFeatures, JsonRoundTrip) {
    const auto corpus = generate_synthetic_corpus({50, 4});
    const auto enc = BinaryFeatureEncoder::fit(corpus);
    const auto back = BinaryFeatureEncoder::from_json(enc.to_json());
    for (std::size_t i = 0; i < corpus[3].size(); ++i) EXPECT_EQ(back.encode(corpus[3], i), enc.encode(corpus[3], i));
}

TEST(LocalContext, PadsAtSentenceStart) {
    const auto rows = embedding_rows(6, 2);
    Tape tape;
    const auto d = local_context(tape, rows, 0, 2, 2);
    EXPECT_EQ(std::vector<double>(d.values().begin(), d.values().end()),
              (std::vector<double>{0, 0, 0, 0, 10, 11, 20, 21, 30, 31}));
}

TEST(LocalContext, ZeroWindowIsTheEmbedding) {
    const auto rows = embedding_rows(3, 4);
    Tape tape;
    const auto d = local_context(tape, rows, 1, 0, 4);
    EXPECT_EQ(std::vector<double>(d.values().begin(), d.values().end()),
              std::vector<double>(rows[1].values().begin(), rows[1].values().end()));
}

TEST(LocalContext, SingleTokenPaddedBothSides) {
    const auto rows = embedding_rows(1, 1);
    Tape tape;
    const auto d = local_context(tape, rows, 0, 2, 1);
    EXPECT_EQ(std::vector<double>(d.values().begin(), d.values().end()), (std::vector<double>{0, 0, 10, 0, 0}));
}

TEST(LocalContext, CenterBlockReconstructsEmbedding) {
    const std::size_t dim = 3;
    const auto rows = embedding_rows(7, dim);
    for (int u = 0; u <= 3; ++u) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Tape tape;
            const auto d = local_context(tape, rows, i, u, dim);
            ASSERT_EQ(d.size(), (2 * static_cast<std::size_t>(u) + 1) * dim);
            for (std::size_t k = 0; k < dim; ++k) EXPECT_EQ(d[u * dim + k], rows[i][k]);
        }
    }
}

TEST(LocalContext, NegativeWindowRejected) {
    const auto rows = embedding_rows(2, 2);
    Tape tape;
    EXPECT_THROW(local_context(tape, rows, 0, -1, 2), ContractError);
}

TEST(Pretrained, FileCoveringVocabularyLeavesNoRandomRows) {
    const auto vocab = Vocabulary::build(std::vector<Sentence>{running_example()});
    std::ostringstream file;
    for (const auto& w : vocab.words()) file << w << " 0.5 -0.5 1.0\n";
    std::istringstream in(file.str());
    Rng rng(1);
    const auto emb = load_pretrained(in, vocab, 3, rng);
    EXPECT_EQ(emb.pretrained_rows, vocab.size());
    for (std::size_t r = 0; r < vocab.size(); ++r) EXPECT_EQ(emb.table[r * 3 + 2], 1.0);
}

TEST(Pretrained, EmptyFileIsRandomAndReproducible) {
    const auto vocab = Vocabulary::build(std::vector<Sentence>{running_example()});
    std::istringstream a(""), b("");
    Rng r1(4), r2(4);
    const auto e1 = load_pretrained(a, vocab, 5, r1);
    const auto e2 = load_pretrained(b, vocab, 5, r2);
    EXPECT_EQ(e1.pretrained_rows, 0u);
    EXPECT_TRUE(std::ranges::equal(e1.table.values(), e2.table.values()));
    for (double v : e1.table.values()) {
        EXPECT_GE(v, -kEmbeddingInitRange);
        EXPECT_LE(v, kEmbeddingInitRange);
    }
}

TEST(Pretrained, DimensionMismatchRejected) {
    const auto vocab = Vocabulary::build(std::vector<Sentence>{running_example()});
    std::istringstream in("hit 1 2 3 4 5\n");
    Rng rng(1);
    EXPECT_THROW(load_pretrained(in, vocab, 300, rng), DimensionError);
}

TEST(Pretrained, InconsistentLineLengthsRejected) {
    const auto vocab = Vocabulary::build(std::vector<Sentence>{running_example()});
    std::istringstream in("hit 1 2 3\ntoday 1 2\n");
    Rng rng(1);
    try {
        load_pretrained(in, vocab, 3, rng);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}
