#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "random.hpp"

namespace joint3ee {

struct SyntheticSpec {
    std::size_t sentences = 50;
    std::uint64_t seed = 7;
    // Probability that an event's trigger is drawn from words shared by
    // several event types; the type is then only recoverable from context.
    double ambiguity = 0.0;
    double no_event_rate = 0.1;
    double two_event_rate = 0.2;
    double time_rate = 0.5;
    bool with_linguistic = true;
};

// Template-generated sentences. Entity type is a function of the mention
// words, event type a function of the trigger word (unless ambiguous), and
// role a function of the event type and the syntactic slot.
namespace synthetic {

struct Lexeme {
    std::vector<std::string> words;
    const char* pos;
};

inline const std::map<std::string, std::vector<Lexeme>>& mention_lexicon() {
    static const std::map<std::string, std::vector<Lexeme>> lex = {
        {"PER", {{{"john", "smith"}, "NNP"}, {{"soldiers"}, "NNS"}, {{"police"}, "NNS"},
                 {{"mary"}, "NNP"}, {{"rebels"}, "NNS"}, {{"officials"}, "NNS"}}},
        {"VEH", {{{"a-10", "warthog"}, "NN"}, {{"tank"}, "NN"}, {{"truck"}, "NN"},
                 {{"helicopter"}, "NN"}, {{"jeep"}, "NN"}}},
        {"WEA", {{{"missile"}, "NN"}, {{"rifle"}, "NN"}, {{"bomb"}, "NN"}, {{"grenade"}, "NN"}}},
        {"GPE", {{{"baghdad"}, "NNP"}, {{"iraq"}, "NNP"}, {{"new", "york"}, "NNP"},
                 {{"basra"}, "NNP"}, {{"kabul"}, "NNP"}}},
        {"TIME", {{{"today"}, "NN"}, {{"yesterday"}, "NN"}, {{"last", "week"}, "NN"},
                  {{"monday"}, "NNP"}}},
        {"VALUE", {{{"$", "5", "million"}, "CD"}, {{"200", "dollars"}, "NNS"}, {{"$", "40"}, "CD"}}},
    };
    return lex;
}

inline const std::map<std::string, std::vector<std::string>>& trigger_lexicon() {
    static const std::map<std::string, std::vector<std::string>> lex = {
        {"Attack", {"hit", "bombed", "struck", "shelled"}},
        {"Transport", {"moved", "drove", "traveled", "shipped"}},
        {"Die", {"died", "perished"}},
        {"Transfer-Ownership", {"bought", "purchased", "acquired"}},
    };
    return lex;
}

// Words that trigger more than one event type.
inline const std::map<std::string, std::vector<std::string>>& ambiguous_triggers() {
    static const std::map<std::string, std::vector<std::string>> lex = {
        {"Attack", {"fired"}},
        {"Transport", {"took", "fired"}},
        {"Die", {"lost"}},
        {"Transfer-Ownership", {"took", "lost"}},
    };
    return lex;
}

class Builder {
public:
    explicit Builder(Sentence& s) : s_(s) {}

    std::size_t word(const std::string& w, const char* pos, const char* chunk) {
        s_.tokens.push_back(w);
        s_.pos.emplace_back(pos);
        s_.chunk.emplace_back(chunk);
        s_.deps.push_back({-1, "root"});
        return s_.tokens.size() - 1;
    }

    // Adds a mention and returns (entity index, head token).
    std::pair<std::size_t, std::size_t> mention(const std::string& type, const Lexeme& lex) {
        const std::size_t start = s_.tokens.size();
        for (std::size_t k = 0; k < lex.words.size(); ++k) {
            word(lex.words[k], lex.pos, k == 0 ? "B-NP" : "I-NP");
        }
        const std::size_t end = s_.tokens.size() - 1;
        for (std::size_t k = start; k < end; ++k) attach(k, end, "compound");
        s_.entities.push_back({start, end, type});
        return {s_.entities.size() - 1, end};
    }

    void attach(std::size_t dependent, std::size_t head, const char* rel) {
        s_.deps[dependent] = {static_cast<int>(head), rel};
    }

private:
    Sentence& s_;
};

}  // namespace synthetic

class SyntheticGenerator {
public:
    explicit SyntheticGenerator(const SyntheticSpec& spec) : spec_(spec), rng_(spec.seed) {}

    std::vector<Sentence> generate() {
        std::vector<Sentence> corpus;
        corpus.reserve(spec_.sentences);
        for (std::size_t k = 0; k < spec_.sentences; ++k) corpus.push_back(sentence());
        return corpus;
    }

    static std::vector<std::string> event_types() {
        std::vector<std::string> out;
        for (const auto& [type, words] : synthetic::trigger_lexicon()) out.push_back(type);
        return out;
    }

private:
    using Builder = synthetic::Builder;

    const synthetic::Lexeme& pick_mention(const std::string& type) {
        const auto& options = synthetic::mention_lexicon().at(type);
        return options[rng_.index(options.size())];
    }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[rng_.index(items.size())];
    }

    std::string trigger_word(const std::string& event_type) {
        if (spec_.ambiguity > 0.0 && rng_.bernoulli(spec_.ambiguity)) {
            return pick(synthetic::ambiguous_triggers().at(event_type));
        }
        return pick(synthetic::trigger_lexicon().at(event_type));
    }

    struct Slot {
        std::size_t entity;
        std::size_t head;
        std::string role;
    };

    void maybe_time(Builder& b, std::size_t trigger, std::vector<Slot>& slots) {
        if (!rng_.bernoulli(spec_.time_rate)) return;
        auto [e, h] = b.mention("TIME", pick_mention("TIME"));
        b.attach(h, trigger, "tmod");
        slots.push_back({e, h, "Time"});
    }

    // Emits one event clause and returns its trigger token.
    std::size_t clause(Builder& b, Sentence& s, const std::string& type) {
        std::vector<Slot> slots;
        std::size_t trigger = 0;
        const std::string word = trigger_word(type);
        if (type == "Attack") {
            if (rng_.bernoulli(0.5)) {
                // [another] TARGET was TRIGGER [TIME]
                std::size_t det = SIZE_MAX;
                if (rng_.bernoulli(0.5)) det = b.word("another", "DT", "B-NP");
                const std::string target_type = rng_.bernoulli(0.5) ? "VEH" : "PER";
                const auto& lex = pick_mention(target_type);
                auto [e, h] = b.mention(target_type, lex);
                if (det != SIZE_MAX) {
                    s.chunk[s.entities[e].start] = "I-NP";
                    b.attach(det, h, "det");
                }
                const std::size_t aux = b.word("was", "VBD", "B-VP");
                trigger = b.word(word, "VBN", "I-VP");
                b.attach(aux, trigger, "auxpass");
                b.attach(h, trigger, "nsubjpass");
                slots.push_back({e, h, "Target"});
            } else {
                // ATTACKER TRIGGER TARGET [with INSTRUMENT]
                const std::string attacker_type = rng_.bernoulli(0.7) ? "PER" : "GPE";
                auto [ea, ha] = b.mention(attacker_type, pick_mention(attacker_type));
                trigger = b.word(word, "VBD", "B-VP");
                b.attach(ha, trigger, "nsubj");
                slots.push_back({ea, ha, "Attacker"});
                const std::string target_type = rng_.bernoulli(0.5) ? "VEH" : "GPE";
                auto [et, ht] = b.mention(target_type, pick_mention(target_type));
                b.attach(ht, trigger, "dobj");
                slots.push_back({et, ht, "Target"});
                if (rng_.bernoulli(0.5)) {
                    const std::size_t prep = b.word("with", "IN", "B-PP");
                    b.attach(prep, trigger, "prep");
                    auto [ei, hi] = b.mention("WEA", pick_mention("WEA"));
                    b.attach(hi, prep, "pobj");
                    slots.push_back({ei, hi, "Instrument"});
                }
            }
        } else if (type == "Transport") {
            const std::string artifact_type = rng_.bernoulli(0.5) ? "PER" : "VEH";
            auto [ea, ha] = b.mention(artifact_type, pick_mention(artifact_type));
            trigger = b.word(word, "VBD", "B-VP");
            b.attach(ha, trigger, "nsubj");
            slots.push_back({ea, ha, "Artifact"});
            const std::size_t prep = b.word("to", "TO", "B-PP");
            b.attach(prep, trigger, "prep");
            auto [ed, hd] = b.mention("GPE", pick_mention("GPE"));
            b.attach(hd, prep, "pobj");
            slots.push_back({ed, hd, "Destination"});
        } else if (type == "Die") {
            auto [ev, hv] = b.mention("PER", pick_mention("PER"));
            trigger = b.word(word, "VBD", "B-VP");
            b.attach(hv, trigger, "nsubj");
            slots.push_back({ev, hv, "Victim"});
            const std::size_t prep = b.word("in", "IN", "B-PP");
            b.attach(prep, trigger, "prep");
            auto [ep, hp] = b.mention("GPE", pick_mention("GPE"));
            b.attach(hp, prep, "pobj");
            slots.push_back({ep, hp, "Place"});
        } else {
            const std::string buyer_type = rng_.bernoulli(0.7) ? "PER" : "GPE";
            auto [eb, hb] = b.mention(buyer_type, pick_mention(buyer_type));
            trigger = b.word(word, "VBD", "B-VP");
            b.attach(hb, trigger, "nsubj");
            slots.push_back({eb, hb, "Buyer"});
            const std::string artifact_type = rng_.bernoulli(0.5) ? "VEH" : "WEA";
            auto [ea, ha] = b.mention(artifact_type, pick_mention(artifact_type));
            b.attach(ha, trigger, "dobj");
            slots.push_back({ea, ha, "Artifact"});
            const std::size_t prep = b.word("for", "IN", "B-PP");
            b.attach(prep, trigger, "prep");
            auto [ep, hp] = b.mention("VALUE", pick_mention("VALUE"));
            b.attach(hp, prep, "pobj");
            slots.push_back({ep, hp, "Price"});
        }
        maybe_time(b, trigger, slots);
        Event ev{trigger, type, {}};
        for (const auto& slot : slots) ev.arguments.push_back({slot.entity, slot.role});
        s.events.push_back(std::move(ev));
        return trigger;
    }

    Sentence sentence() {
        Sentence s;
        Builder b(s);
        const auto types = event_types();
        if (rng_.bernoulli(spec_.no_event_rate)) {
            // PER said [TIME] | the VEH was in GPE
            if (rng_.bernoulli(0.5)) {
                auto [e, h] = b.mention("PER", pick_mention("PER"));
                const std::size_t verb = b.word("said", "VBD", "B-VP");
                b.attach(h, verb, "nsubj");
                if (rng_.bernoulli(spec_.time_rate)) {
                    auto [et, ht] = b.mention("TIME", pick_mention("TIME"));
                    b.attach(ht, verb, "tmod");
                }
            } else {
                const std::size_t det = b.word("the", "DT", "B-NP");
                auto [e, h] = b.mention("VEH", pick_mention("VEH"));
                s.chunk[s.entities[e].start] = "I-NP";
                b.attach(det, h, "det");
                const std::size_t verb = b.word("was", "VBD", "B-VP");
                b.attach(h, verb, "nsubj");
                const std::size_t prep = b.word("in", "IN", "B-PP");
                b.attach(prep, verb, "prep");
                auto [eg, hg] = b.mention("GPE", pick_mention("GPE"));
                b.attach(hg, prep, "pobj");
            }
        } else {
            const std::size_t first = clause(b, s, pick(types));
            if (rng_.bernoulli(spec_.two_event_rate)) {
                const std::size_t cc = b.word("and", "CC", "O");
                b.attach(cc, first, "cc");
                const std::size_t second = clause(b, s, pick(types));
                b.attach(second, first, "conj");
            }
        }
        if (!spec_.with_linguistic) {
            s.pos.clear();
            s.chunk.clear();
            s.deps.clear();
        }
        return s;
    }

    SyntheticSpec spec_;
    Rng rng_;
};

inline std::vector<Sentence> generate_synthetic_corpus(const SyntheticSpec& spec) {
    return SyntheticGenerator(spec).generate();
}

// "Another a-10 warthog was hit today": the running example sentence.
inline Sentence running_example() {
    Sentence s;
    s.tokens = {"another", "a-10", "warthog", "was", "hit", "today"};
    s.entities = {{1, 2, "VEH"}, {5, 5, "TIME"}};
    s.events = {{4, "Attack", {{0, "Target"}, {1, "Time"}}}};
    s.pos = {"DT", "NN", "NN", "VBD", "VBN", "NN"};
    s.chunk = {"B-NP", "I-NP", "I-NP", "B-VP", "I-VP", "B-NP"};
    s.deps = {{2, "det"}, {2, "compound"}, {4, "nsubjpass"}, {4, "auxpass"}, {-1, "root"}, {4, "tmod"}};
    return s;
}

}  // namespace joint3ee
