#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace joint3ee {

using json = nlohmann::json;

struct EntityMention {
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
    std::string type;

    bool operator==(const EntityMention&) const = default;
};

struct EventArgument {
    std::size_t entity = 0;  // index into Sentence::entities
    std::string role;

    bool operator==(const EventArgument&) const = default;
};

struct Event {
    std::size_t trigger = 0;
    std::string type;
    std::vector<EventArgument> arguments;

    bool operator==(const Event&) const = default;
};

struct DependencyEdge {
    int head = -1;  // -1 marks the root
    std::string relation;

    bool operator==(const DependencyEdge&) const = default;
};

// A tokenized sentence with gold (or predicted) annotations. The three
// linguistic layers are optional; an empty vector means "absent".
struct Sentence {
    std::vector<std::string> tokens;
    std::vector<EntityMention> entities;
    std::vector<Event> events;
    std::vector<std::string> pos;
    std::vector<std::string> chunk;
    std::vector<DependencyEdge> deps;

    std::size_t size() const { return tokens.size(); }
    bool has_pos() const { return !pos.empty(); }
    bool has_chunk() const { return !chunk.empty(); }
    bool has_deps() const { return !deps.empty(); }

    bool operator==(const Sentence&) const = default;
};

inline constexpr std::string_view kOther = "Other";

// Closed label sets. Index 0 of event types and roles is always Other.
// BIO tags are laid out as O, B-X0, I-X0, B-X1, I-X1, ...
class LabelSchema {
public:
    LabelSchema() : event_types_{std::string(kOther)}, roles_{std::string(kOther)} { rebuild(); }

    LabelSchema(std::vector<std::string> entity_types, std::vector<std::string> event_types,
                std::vector<std::string> roles)
        : entity_types_(std::move(entity_types)) {
        event_types_.emplace_back(kOther);
        roles_.emplace_back(kOther);
        for (auto& e : event_types) {
            if (e != kOther) event_types_.push_back(std::move(e));
        }
        for (auto& r : roles) {
            if (r != kOther) roles_.push_back(std::move(r));
        }
        rebuild();
    }

    // Label sets observed in a corpus, sorted for stable indices.
    static LabelSchema from_corpus(std::span<const Sentence> corpus) {
        std::set<std::string> entities, events, roles;
        for (const auto& s : corpus) {
            for (const auto& m : s.entities) entities.insert(m.type);
            for (const auto& e : s.events) {
                events.insert(e.type);
                for (const auto& a : e.arguments) roles.insert(a.role);
            }
        }
        return LabelSchema({entities.begin(), entities.end()}, {events.begin(), events.end()},
                           {roles.begin(), roles.end()});
    }

    const std::vector<std::string>& entity_types() const { return entity_types_; }
    const std::vector<std::string>& event_types() const { return event_types_; }
    const std::vector<std::string>& roles() const { return roles_; }
    const std::vector<std::string>& bio_tags() const { return bio_tags_; }

    std::size_t bio_count() const { return bio_tags_.size(); }
    std::size_t event_count() const { return event_types_.size(); }
    std::size_t role_count() const { return roles_.size(); }

    std::optional<std::size_t> find_entity_type(std::string_view name) const {
        return find(entity_index_, name);
    }
    std::optional<std::size_t> find_event_type(std::string_view name) const {
        return find(event_index_, name);
    }
    std::optional<std::size_t> find_role(std::string_view name) const {
        return find(role_index_, name);
    }

    std::size_t entity_type_index(std::string_view name) const {
        return require(find_entity_type(name), "entity type", name);
    }
    std::size_t event_type_index(std::string_view name) const {
        return require(find_event_type(name), "event type", name);
    }
    std::size_t role_index(std::string_view name) const {
        return require(find_role(name), "argument role", name);
    }

    static constexpr std::size_t outside_tag() { return 0; }
    static constexpr std::size_t begin_tag(std::size_t entity) { return 1 + 2 * entity; }
    static constexpr std::size_t inside_tag(std::size_t entity) { return 2 + 2 * entity; }
    static constexpr bool is_begin(std::size_t tag) { return tag != 0 && tag % 2 == 1; }
    static constexpr bool is_inside(std::size_t tag) { return tag != 0 && tag % 2 == 0; }
    static constexpr std::size_t entity_of(std::size_t tag) { return (tag - 1) / 2; }

    json to_json() const {
        return {{"entity_types", entity_types_},
                {"event_types", std::vector(event_types_.begin() + 1, event_types_.end())},
                {"roles", std::vector(roles_.begin() + 1, roles_.end())}};
    }

    static LabelSchema from_json(const json& j) {
        return LabelSchema(j.at("entity_types").get<std::vector<std::string>>(),
                           j.at("event_types").get<std::vector<std::string>>(),
                           j.at("roles").get<std::vector<std::string>>());
    }

    bool operator==(const LabelSchema& other) const {
        return entity_types_ == other.entity_types_ && event_types_ == other.event_types_ &&
               roles_ == other.roles_;
    }

private:
    using Index = std::map<std::string, std::size_t, std::less<>>;

    static std::optional<std::size_t> find(const Index& index, std::string_view name) {
        auto it = index.find(name);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }

    static std::size_t require(std::optional<std::size_t> found, std::string_view kind,
                               std::string_view name) {
        if (!found) throw SchemaError("unknown " + std::string(kind) + " '" + std::string(name) + "'");
        return *found;
    }

    void rebuild() {
        entity_index_.clear();
        event_index_.clear();
        role_index_.clear();
        bio_tags_ = {"O"};
        for (std::size_t i = 0; i < entity_types_.size(); ++i) {
            if (!entity_index_.emplace(entity_types_[i], i).second) {
                throw SchemaError("duplicate entity type '" + entity_types_[i] + "'");
            }
            bio_tags_.push_back("B-" + entity_types_[i]);
            bio_tags_.push_back("I-" + entity_types_[i]);
        }
        for (std::size_t i = 0; i < event_types_.size(); ++i) {
            if (!event_index_.emplace(event_types_[i], i).second) {
                throw SchemaError("duplicate event type '" + event_types_[i] + "'");
            }
        }
        for (std::size_t i = 0; i < roles_.size(); ++i) {
            if (!role_index_.emplace(roles_[i], i).second) {
                throw SchemaError("duplicate role '" + roles_[i] + "'");
            }
        }
    }

    std::vector<std::string> entity_types_;
    std::vector<std::string> event_types_;
    std::vector<std::string> roles_;
    std::vector<std::string> bio_tags_;
    Index entity_index_, event_index_, role_index_;
};

// n x n role grid; rows are trigger candidates, columns mention-begin tokens.
class ArgumentMatrix {
public:
    explicit ArgumentMatrix(std::size_t n = 0) : n_(n), cells_(n * n, 0) {}

    std::size_t size() const { return n_; }
    std::size_t at(std::size_t i, std::size_t j) const { return cells_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, std::size_t role) { cells_[i * n_ + j] = role; }
    std::span<const std::size_t> row(std::size_t i) const {
        return std::span(cells_).subspan(i * n_, n_);
    }

    bool operator==(const ArgumentMatrix&) const = default;

private:
    std::size_t n_;
    std::vector<std::size_t> cells_;
};

// E, T and A for one sentence, as label indices into a LabelSchema.
struct GoldLabels {
    std::vector<std::size_t> entity_tags;
    std::vector<std::size_t> event_types;
    ArgumentMatrix arguments;
};

inline std::string span_string(const EntityMention& m) {
    return m.type + "@[" + std::to_string(m.start) + "," + std::to_string(m.end) + "]";
}

// Structural checks independent of any schema: bounds, ordering, overlap,
// argument references, single event per trigger token.
inline void validate_sentence(const Sentence& s) {
    const std::size_t n = s.size();
    if (n == 0) throw AnnotationError("sentence has no tokens");
    for (const auto& m : s.entities) {
        if (m.end < m.start) {
            throw AnnotationError("span error: end < start in mention " + span_string(m));
        }
        if (m.end >= n) {
            throw AnnotationError("span error: mention " + span_string(m) +
                                  " out of bounds for " + std::to_string(n) + " tokens");
        }
    }
    std::vector<const EntityMention*> sorted;
    for (const auto& m : s.entities) sorted.push_back(&m);
    std::ranges::sort(sorted, {}, &EntityMention::start);
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k]->start <= sorted[k - 1]->end) {
            throw AnnotationError("overlapping mentions " + span_string(*sorted[k - 1]) + " and " +
                                  span_string(*sorted[k]));
        }
    }
    std::set<std::size_t> triggers;
    for (const auto& e : s.events) {
        if (e.trigger >= n) {
            throw AnnotationError("trigger index " + std::to_string(e.trigger) + " out of bounds");
        }
        if (!triggers.insert(e.trigger).second) {
            throw AnnotationError("two events share trigger token " + std::to_string(e.trigger));
        }
        for (const auto& a : e.arguments) {
            if (a.entity >= s.entities.size()) {
                throw AnnotationError("argument refers to missing entity " + std::to_string(a.entity));
            }
        }
    }
    auto check_layer = [n](std::size_t size, const char* name) {
        if (size != 0 && size != n) {
            throw AnnotationError(std::string(name) + " layer has " + std::to_string(size) +
                                  " entries for " + std::to_string(n) + " tokens");
        }
    };
    check_layer(s.pos.size(), "pos");
    check_layer(s.chunk.size(), "chunk");
    check_layer(s.deps.size(), "deps");
    for (const auto& d : s.deps) {
        if (d.head < -1 || d.head >= static_cast<int>(n)) {
            throw AnnotationError("dependency head " + std::to_string(d.head) + " out of bounds");
        }
    }
}

// Every label in the sentence must belong to the schema.
inline void validate_labels(const Sentence& s, const LabelSchema& schema) {
    for (const auto& m : s.entities) schema.entity_type_index(m.type);
    for (const auto& e : s.events) {
        if (e.type == kOther) throw SchemaError("event type 'Other' used on a trigger");
        schema.event_type_index(e.type);
        for (const auto& a : e.arguments) {
            if (a.role == kOther) throw SchemaError("argument role 'Other' used on an argument");
            schema.role_index(a.role);
        }
    }
}

inline std::vector<std::size_t> encode_bio(const Sentence& s, const LabelSchema& schema) {
    std::vector<std::size_t> tags(s.size(), LabelSchema::outside_tag());
    std::vector<const EntityMention*> owner(s.size(), nullptr);
    for (const auto& m : s.entities) {
        if (m.end < m.start || m.end >= s.size()) {
            throw AnnotationError("span error: mention " + span_string(m) + " out of bounds");
        }
        const std::size_t type = schema.entity_type_index(m.type);
        for (std::size_t k = m.start; k <= m.end; ++k) {
            if (owner[k]) {
                throw AnnotationError("overlapping mentions " + span_string(*owner[k]) + " and " +
                                      span_string(m));
            }
            owner[k] = &m;
            tags[k] = k == m.start ? LabelSchema::begin_tag(type) : LabelSchema::inside_tag(type);
        }
    }
    return tags;
}

inline ArgumentMatrix build_argument_matrix(const Sentence& s, const LabelSchema& schema) {
    const std::size_t n = s.size();
    ArgumentMatrix a(n);
    for (const auto& e : s.events) {
        for (const auto& arg : e.arguments) {
            if (arg.entity >= s.entities.size()) {
                throw AnnotationError("argument refers to missing entity " + std::to_string(arg.entity));
            }
            const std::size_t j = s.entities[arg.entity].start;
            if (j == e.trigger) continue;  // the diagonal is always Other
            const std::size_t role = schema.role_index(arg.role);
            if (a.at(e.trigger, j) != 0 && a.at(e.trigger, j) != role) {
                throw AnnotationError("two roles for trigger " + std::to_string(e.trigger) +
                                      " and mention beginning at " + std::to_string(j));
            }
            a.set(e.trigger, j, role);
        }
    }
    return a;
}

inline GoldLabels gold_labels(const Sentence& s, const LabelSchema& schema) {
    GoldLabels gold;
    gold.entity_tags = encode_bio(s, schema);
    gold.event_types.assign(s.size(), 0);
    for (const auto& e : s.events) gold.event_types[e.trigger] = schema.event_type_index(e.type);
    gold.arguments = build_argument_matrix(s, schema);
    return gold;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON corpus format
// ---------------------------------------------------------------------------

struct LoadOptions {
    // When set, every label must belong to this schema.
    const LabelSchema* schema = nullptr;
    // Receives non-fatal notes (dropped duplicate events, reduced triggers).
    std::vector<std::string>* warnings = nullptr;
};

namespace detail {

// Reduces a multi-token trigger span to one token: the first token whose
// dependency head lies outside the span, else the first token.
inline std::size_t trigger_head(const Sentence& s, std::size_t start, std::size_t end) {
    if (s.has_deps() && end < s.deps.size()) {
        for (std::size_t k = start; k <= end; ++k) {
            const int h = s.deps[k].head;
            if (h < static_cast<int>(start) || h > static_cast<int>(end)) return k;
        }
    }
    return start;
}

inline std::size_t as_index(const json& j, const char* field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw ParseError(std::string("field '") + field + "' must be a non-negative integer");
    }
    return j.get<std::size_t>();
}

}  // namespace detail

inline Sentence sentence_from_json(const json& record, std::vector<std::string>* warnings = nullptr) {
    if (!record.is_object()) throw ParseError("record is not an object");
    if (!record.contains("tokens") || !record["tokens"].is_array()) {
        throw ParseError("record lacks a 'tokens' array");
    }
    Sentence s;
    try {
        s.tokens = record["tokens"].get<std::vector<std::string>>();
        if (record.contains("pos")) s.pos = record["pos"].get<std::vector<std::string>>();
        if (record.contains("chunk")) s.chunk = record["chunk"].get<std::vector<std::string>>();
        if (record.contains("deps")) {
            for (const auto& d : record["deps"]) {
                s.deps.push_back({d.at("head").get<int>(), d.at("rel").get<std::string>()});
            }
        }
        if (record.contains("entities")) {
            for (const auto& m : record["entities"]) {
                s.entities.push_back({detail::as_index(m.at("start"), "start"),
                                      detail::as_index(m.at("end"), "end"),
                                      m.at("type").get<std::string>()});
            }
        }
        std::set<std::size_t> seen;
        if (record.contains("events")) {
            for (const auto& e : record["events"]) {
                Event ev;
                const auto& t = e.at("trigger");
                if (t.is_array()) {
                    if (t.size() != 2) throw ParseError("trigger span must be [start, end]");
                    const std::size_t a = detail::as_index(t[0], "trigger");
                    const std::size_t b = detail::as_index(t[1], "trigger");
                    if (b < a || b >= s.tokens.size()) throw ParseError("span error: bad trigger span");
                    ev.trigger = detail::trigger_head(s, a, b);
                    if (warnings && a != b) {
                        warnings->push_back("multi-token trigger [" + std::to_string(a) + "," +
                                            std::to_string(b) + "] reduced to token " +
                                            std::to_string(ev.trigger));
                    }
                } else {
                    ev.trigger = detail::as_index(t, "trigger");
                }
                ev.type = e.at("type").get<std::string>();
                if (e.contains("args")) {
                    for (const auto& a : e["args"]) {
                        ev.arguments.push_back({detail::as_index(a.at("entity"), "entity"),
                                                a.at("role").get<std::string>()});
                    }
                }
                if (!seen.insert(ev.trigger).second) {
                    if (warnings) {
                        warnings->push_back("second event on trigger token " +
                                            std::to_string(ev.trigger) + " dropped");
                    }
                    continue;
                }
                s.events.push_back(std::move(ev));
            }
        }
    } catch (const json::exception& ex) {
        throw ParseError(std::string("malformed record: ") + ex.what());
    }
    return s;
}

inline json sentence_to_json(const Sentence& s) {
    json j;
    j["tokens"] = s.tokens;
    j["entities"] = json::array();
    for (const auto& m : s.entities) {
        j["entities"].push_back({{"start", m.start}, {"end", m.end}, {"type", m.type}});
    }
    j["events"] = json::array();
    for (const auto& e : s.events) {
        json args = json::array();
        for (const auto& a : e.arguments) args.push_back({{"entity", a.entity}, {"role", a.role}});
        j["events"].push_back({{"trigger", e.trigger}, {"type", e.type}, {"args", args}});
    }
    if (s.has_pos()) j["pos"] = s.pos;
    if (s.has_chunk()) j["chunk"] = s.chunk;
    if (s.has_deps()) {
        j["deps"] = json::array();
        for (const auto& d : s.deps) j["deps"].push_back({{"head", d.head}, {"rel", d.relation}});
    }
    return j;
}

inline std::vector<Sentence> read_corpus(std::istream& in, const LoadOptions& options = {}) {
    std::vector<Sentence> corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json record;
            try {
                record = json::parse(line);
            } catch (const json::parse_error& ex) {
                throw ParseError(std::string("invalid JSON: ") + ex.what());
            }
            std::vector<std::string> notes;
            Sentence s = sentence_from_json(record, &notes);
            validate_sentence(s);
            if (options.schema) validate_labels(s, *options.schema);
            if (options.warnings) {
                for (auto& note : notes) {
                    options.warnings->push_back("line " + std::to_string(line_no) + ": " + note);
                }
            }
            corpus.push_back(std::move(s));
        } catch (const ParseError& ex) {
            if (ex.line() != 0) throw;
            throw ParseError(ex.what(), line_no);
        } catch (const SchemaError& ex) {
            throw SchemaError("line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const AnnotationError& ex) {
            throw AnnotationError("line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return corpus;
}

inline std::vector<Sentence> load_corpus(const std::string& path, const LoadOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file '" + path + "'");
    return read_corpus(in, options);
}

inline void write_corpus(std::ostream& out, std::span<const Sentence> corpus) {
    for (const auto& s : corpus) out << sentence_to_json(s).dump() << '\n';
}

inline void save_corpus(const std::string& path, std::span<const Sentence> corpus) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus file '" + path + "'");
    write_corpus(out, corpus);
}

}  // namespace joint3ee
