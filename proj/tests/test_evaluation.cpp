#include <gtest/gtest.h>

#include <numeric>

#include "joint3ee/evaluation.hpp"
#include "joint3ee/synthetic.hpp"

using namespace joint3ee;

namespace {

Sentence two_entity_sentence() {
    Sentence s;
    s.tokens = {"troops", "shelled", "the", "town", "yesterday"};
    s.entities = {{0, 0, "PER"}, {3, 3, "GPE"}, {4, 4, "TIME"}};
    s.events = {{1, "Attack", {{0, "Attacker"}, {1, "Target"}, {2, "Time"}}}};
    return s;
}

}  // namespace

TEST(Score, IdenticalCorporaArePerfect) {
    const auto gold = generate_synthetic_corpus({40, 9});
    const auto r = score(gold, gold);
    for (const auto& [name, member] : metric_families()) {
        EXPECT_EQ((r.*member).f1(), 1.0) << name;
        EXPECT_EQ((r.*member).correct, (r.*member).gold) << name;
    }
    EXPECT_TRUE(r.role_confusions.empty());
}

TEST(Score, HalfRightEntities) {
    Sentence g, p;
    g.tokens = p.tokens = {"a", "b", "c", "d"};
    g.entities = {{0, 0, "PER"}, {2, 3, "ORG"}};
    p.entities = {{0, 0, "PER"}, {2, 2, "ORG"}};
    const std::vector<Sentence> gs{g}, ps{p};
    const auto r = score(ps, gs);
    EXPECT_EQ(r.entity.precision(), 0.5);
    EXPECT_EQ(r.entity.recall(), 0.5);
    EXPECT_EQ(r.entity.f1(), 0.5);
}

TEST(Score, EmptyPredictionsScoreZero) {
    const std::vector<Sentence> gold{two_entity_sentence()};
    Sentence p;
    p.tokens = gold[0].tokens;
    const auto r = score(std::vector<Sentence>{p}, gold);
    EXPECT_EQ(r.entity.precision(), 0.0);
    EXPECT_EQ(r.entity.f1(), 0.0);
    EXPECT_EQ(r.trigger_classification.gold, 1u);
}

TEST(Score, WrongTypeCountsForIdentificationOnly) {
    const std::vector<Sentence> gold{two_entity_sentence()};
    Sentence p = gold[0];
    p.events[0].type = "Die";
    const auto r = score(std::vector<Sentence>{p}, gold);
    EXPECT_EQ(r.trigger_identification.f1(), 1.0);
    EXPECT_EQ(r.trigger_classification.f1(), 0.0);
    // arguments are keyed by event type, so they miss as well
    EXPECT_EQ(r.argument_identification.correct, 0u);
    EXPECT_EQ((r.trigger_confusions.at({"Attack", "Die"})), 1u);
}

TEST(Score, WrongRoleCountsForArgumentIdentificationOnly) {
    const std::vector<Sentence> gold{two_entity_sentence()};
    Sentence p = gold[0];
    p.events[0].arguments[1].role = "Place";
    const auto r = score(std::vector<Sentence>{p}, gold);
    EXPECT_EQ(r.argument_identification.f1(), 1.0);
    EXPECT_EQ(r.role_classification.correct, 2u);
    EXPECT_EQ((r.role_confusions.at({"Target", "Place"})), 1u);
}

TEST(Score, ArgumentMatchesOnMentionBegin) {
    Sentence g = two_entity_sentence();
    Sentence p = g;
    p.entities[1] = {3, 4, "GPE"};  // wider span, same begin
    p.entities.pop_back();
    p.events[0].arguments.pop_back();
    const auto r = score(std::vector<Sentence>{p}, std::vector<Sentence>{g});
    EXPECT_EQ(r.role_classification.correct, 2u);
    EXPECT_EQ(r.role_classification.predicted, 2u);
    EXPECT_EQ(r.entity.correct, 1u);
}

TEST(Score, IdentificationAtLeastClassification) {
    const auto gold = generate_synthetic_corpus({60, 4});
    auto pred = generate_synthetic_corpus({60, 4});
    Rng rng(3);
    const std::vector<std::string> types{"Attack", "Die", "Meet", "Transport"};
    const std::vector<std::string> roles{"Agent", "Victim", "Place", "Time"};
    for (auto& s : pred) {
        for (auto& e : s.events) {
            if (rng.bernoulli(0.3)) e.type = types[rng.index(types.size())];
            for (auto& a : e.arguments) {
                if (rng.bernoulli(0.3)) a.role = roles[rng.index(roles.size())];
            }
        }
    }
    const auto r = score(pred, gold);
    EXPECT_GE(r.trigger_identification.correct, r.trigger_classification.correct);
    EXPECT_GE(r.argument_identification.correct, r.role_classification.correct);
    EXPECT_LT(r.role_classification.f1(), 1.0);
}

TEST(Score, SwappingSidesSwapsPrecisionAndRecall) {
    const auto gold = generate_synthetic_corpus({30, 1});
    auto pred = gold;
    for (std::size_t k = 0; k < pred.size(); k += 3) {
        if (!pred[k].entities.empty()) pred[k].entities.pop_back();
        pred[k].events.clear();
    }
    const auto a = score(pred, gold), b = score(gold, pred);
    for (const auto& [name, member] : metric_families()) {
        EXPECT_DOUBLE_EQ((a.*member).precision(), (b.*member).recall()) << name;
        EXPECT_DOUBLE_EQ((a.*member).recall(), (b.*member).precision()) << name;
        EXPECT_DOUBLE_EQ((a.*member).f1(), (b.*member).f1()) << name;
    }
}

TEST(Score, AddingCorrectPredictionNeverHurts) {
    const auto gold = generate_synthetic_corpus({20, 12});
    std::vector<Sentence> pred;
    for (const auto& s : gold) {
        Sentence p;
        p.tokens = s.tokens;
        pred.push_back(p);
    }
    double last = score(pred, gold).entity.f1();
    for (std::size_t k = 0; k < gold.size(); ++k) {
        for (const auto& m : gold[k].entities) {
            pred[k].entities.push_back(m);
            const double now = score(pred, gold).entity.f1();
            EXPECT_GE(now, last);
            last = now;
        }
    }
    EXPECT_EQ(last, 1.0);
}

TEST(Score, DuplicatePredictionsMatchOnce) {
    Sentence g = two_entity_sentence();
    Sentence p = g;
    p.entities.push_back(g.entities[0]);
    const auto r = score(std::vector<Sentence>{p}, std::vector<Sentence>{g});
    EXPECT_EQ(r.entity.correct, 3u);
    EXPECT_EQ(r.entity.predicted, 4u);
}

TEST(Score, MisalignedCorporaRejected) {
    const auto gold = generate_synthetic_corpus({3, 1});
    EXPECT_THROW(score(std::vector<Sentence>(gold.begin(), gold.begin() + 2), gold), ContractError);
    auto shifted = gold;
    shifted[1].tokens.push_back("extra");
    EXPECT_THROW(score(shifted, gold), ContractError);
}

TEST(SelectionScore, MeanOfThreeF1s) {
    EvalReport r;
    r.entity = {1, 1, 1};
    r.trigger_classification = {0, 1, 1};
    r.role_classification = {1, 2, 2};
    EXPECT_DOUBLE_EQ(selection_score(r), (1.0 + 0.0 + 0.5) / 3.0);
}

TEST(ErrorReport, MissedAndIncorrectTriggers) {
    Sentence g1, g2, p1, p2;
    g1.tokens = p1.tokens = {"a", "b", "c"};
    g2.tokens = p2.tokens = {"d", "e", "f"};
    g1.events = {{0, "Attack", {}}, {2, "Die", {}}};
    g2.events = {{1, "Attack", {}}};
    p1.events = {{0, "Die", {}}, {1, "Meet", {}}};  // offset 0 found (wrong type), offset 2 missed
    p2.events = {{0, "Meet", {}}, {2, "Attack", {}}};
    const auto e = error_report(std::vector<Sentence>{p1, p2}, std::vector<Sentence>{g1, g2});
    EXPECT_EQ(e.missed_total, 2u);
    EXPECT_EQ(e.incorrect_total, 3u);
    ASSERT_EQ(e.incorrect.size(), 2u);
    EXPECT_EQ(e.incorrect[0].label, "Meet");
    EXPECT_EQ(e.incorrect[0].count, 2u);
    EXPECT_NEAR(e.incorrect[0].percent, 200.0 / 3.0, 1e-12);
    double sum = 0.0;
    for (const auto& s : e.missed) sum += s.percent;
    EXPECT_NEAR(sum, 100.0, 1e-9);
    const std::string text = format_errors(e);
    EXPECT_NE(text.find("MISSED (2)"), std::string::npos);
    EXPECT_NE(text.find("INCORRECT (3)"), std::string::npos);
}

TEST(ErrorReport, PercentagesSumTo100OnRandomCorpora) {
    const auto gold = generate_synthetic_corpus({50, 2});
    auto pred = generate_synthetic_corpus({50, 3});
    for (std::size_t k = 0; k < pred.size(); ++k) {
        pred[k].tokens = gold[k].tokens;
        for (auto& e : pred[k].events) e.trigger %= gold[k].size();
        pred[k].entities.clear();
        for (auto& e : pred[k].events) e.arguments.clear();
    }
    const auto e = error_report(pred, gold);
    for (const auto* shares : {&e.missed, &e.incorrect}) {
        if (shares->empty()) continue;
        double sum = 0.0;
        for (const auto& s : *shares) sum += s.percent;
        EXPECT_NEAR(sum, 100.0, 1e-9);
    }
}

TEST(Report, TextAndJsonLayouts) {
    const auto gold = generate_synthetic_corpus({5, 2});
    const auto r = score(gold, gold);
    const std::string text = format_report(r);
    for (const auto& [name, member] : metric_families()) EXPECT_NE(text.find(name), std::string::npos);
    EXPECT_NE(text.find("100.00"), std::string::npos);
    const auto j = report_to_json(r);
    EXPECT_EQ(j.at("Entity Mention").at("f1").get<double>(), 1.0);
    EXPECT_EQ(j.size(), 5u);
}
