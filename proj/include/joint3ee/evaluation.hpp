#pragma once

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <set>
#include <span>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "corpus.hpp"

namespace joint3ee {

// Micro-averaged counts for one metric family.
struct Prf {
    std::size_t correct = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;

    double precision() const { return predicted ? static_cast<double>(correct) / predicted : 0.0; }
    double recall() const { return gold ? static_cast<double>(correct) / gold : 0.0; }
    double f1() const {
        const double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }

    Prf& operator+=(const Prf& o) {
        correct += o.correct;
        predicted += o.predicted;
        gold += o.gold;
        return *this;
    }
};

struct EvalReport {
    Prf entity;
    Prf trigger_identification;
    Prf trigger_classification;
    Prf argument_identification;
    Prf role_classification;
    // (gold role, predicted role) -> count, for arguments identified with the wrong role.
    std::map<std::pair<std::string, std::string>, std::size_t> role_confusions;
    // (gold event type, predicted event type) -> count, for triggers at matching offsets.
    std::map<std::pair<std::string, std::string>, std::size_t> trigger_confusions;
};

namespace detail {

// Matches two multisets of keys; returns the number of common elements.
template <typename Key>
std::size_t multiset_overlap(std::vector<Key> a, std::vector<Key> b) {
    std::ranges::sort(a);
    std::ranges::sort(b);
    std::vector<Key> common;
    std::ranges::set_intersection(a, b, std::back_inserter(common));
    return common.size();
}

using ArgKey = std::tuple<std::string, std::size_t, std::string>;  // event type, anchor, role

inline std::vector<ArgKey> argument_keys(const Sentence& s) {
    std::vector<ArgKey> out;
    for (const auto& e : s.events) {
        for (const auto& a : e.arguments) {
            out.emplace_back(e.type, s.entities.at(a.entity).start, a.role);
        }
    }
    return out;
}

inline void check_alignment(std::span<const Sentence> predictions, std::span<const Sentence> gold) {
    if (predictions.size() != gold.size()) {
        throw ContractError("score: " + std::to_string(predictions.size()) + " predicted sentences for " +
                            std::to_string(gold.size()) + " gold sentences");
    }
    for (std::size_t k = 0; k < gold.size(); ++k) {
        if (predictions[k].tokens != gold[k].tokens) {
            throw ContractError("score: sentence " + std::to_string(k) + " differs between prediction and gold");
        }
    }
}

}  // namespace detail

// Entity: span and type match. Trigger identification: offset match;
// classification: offset and type. Argument identification: event type
// and mention-begin anchor match a gold argument; classification: role too.
inline EvalReport score(std::span<const Sentence> predictions, std::span<const Sentence> gold) {
    detail::check_alignment(predictions, gold);
    EvalReport r;
    for (std::size_t k = 0; k < gold.size(); ++k) {
        const Sentence& p = predictions[k];
        const Sentence& g = gold[k];

        using Span = std::tuple<std::size_t, std::size_t, std::string>;
        std::vector<Span> pe, ge;
        for (const auto& m : p.entities) pe.emplace_back(m.start, m.end, m.type);
        for (const auto& m : g.entities) ge.emplace_back(m.start, m.end, m.type);
        r.entity += {detail::multiset_overlap(pe, ge), pe.size(), ge.size()};

        std::vector<std::size_t> pt, gt;
        std::vector<std::pair<std::size_t, std::string>> ptc, gtc;
        for (const auto& e : p.events) {
            pt.push_back(e.trigger);
            ptc.emplace_back(e.trigger, e.type);
        }
        for (const auto& e : g.events) {
            gt.push_back(e.trigger);
            gtc.emplace_back(e.trigger, e.type);
        }
        r.trigger_identification += {detail::multiset_overlap(pt, gt), pt.size(), gt.size()};
        r.trigger_classification += {detail::multiset_overlap(ptc, gtc), ptc.size(), gtc.size()};
        for (const auto& pe_ : p.events) {
            for (const auto& ge_ : g.events) {
                if (pe_.trigger == ge_.trigger && pe_.type != ge_.type) ++r.trigger_confusions[{ge_.type, pe_.type}];
            }
        }

        const auto pa = detail::argument_keys(p);
        const auto ga = detail::argument_keys(g);
        using IdKey = std::pair<std::string, std::size_t>;
        std::vector<IdKey> pid, gid;
        for (const auto& [t, j, role] : pa) pid.emplace_back(t, j);
        for (const auto& [t, j, role] : ga) gid.emplace_back(t, j);
        r.argument_identification += {detail::multiset_overlap(pid, gid), pid.size(), gid.size()};
        r.role_classification += {detail::multiset_overlap(pa, ga), pa.size(), ga.size()};

        // Confusions: identified anchors whose roles disagree, paired in order.
        std::map<IdKey, std::vector<std::string>> pending_pred, pending_gold;
        auto remaining = [](std::vector<detail::ArgKey> xs, std::vector<detail::ArgKey> ys) {
            std::ranges::sort(xs);
            std::ranges::sort(ys);
            std::vector<detail::ArgKey> diff;
            std::ranges::set_difference(xs, ys, std::back_inserter(diff));
            return diff;
        };
        for (const auto& [t, j, role] : remaining(pa, ga)) pending_pred[{t, j}].push_back(role);
        for (const auto& [t, j, role] : remaining(ga, pa)) pending_gold[{t, j}].push_back(role);
        for (const auto& [key, roles] : pending_pred) {
            auto it = pending_gold.find(key);
            if (it == pending_gold.end()) continue;
            const std::size_t pairs = std::min(roles.size(), it->second.size());
            for (std::size_t q = 0; q < pairs; ++q) ++r.role_confusions[{it->second[q], roles[q]}];
        }
    }
    return r;
}

// Dev-set model selection: mean F1 of the three decoded layers.
inline double selection_score(const EvalReport& r) {
    return (r.entity.f1() + r.trigger_classification.f1() + r.role_classification.f1()) / 3.0;
}

struct ErrorShare {
    std::string label;
    std::size_t count = 0;
    double percent = 0.0;
};

// Trigger identification errors by event type. MISSED: gold triggers with
// no predicted trigger at that token. INCORRECT: predicted triggers at a
// token that has no gold trigger.
struct ErrorReport {
    std::vector<ErrorShare> missed;
    std::vector<ErrorShare> incorrect;
    std::size_t missed_total = 0;
    std::size_t incorrect_total = 0;
    std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> role_confusions;
};

inline ErrorReport error_report(std::span<const Sentence> predictions, std::span<const Sentence> gold,
                                std::size_t top_k = 5) {
    detail::check_alignment(predictions, gold);
    std::map<std::string, std::size_t> missed, incorrect;
    ErrorReport out;
    for (std::size_t k = 0; k < gold.size(); ++k) {
        std::set<std::size_t> pt, gt;
        for (const auto& e : predictions[k].events) pt.insert(e.trigger);
        for (const auto& e : gold[k].events) gt.insert(e.trigger);
        for (const auto& e : gold[k].events) {
            if (!pt.contains(e.trigger)) {
                ++missed[e.type];
                ++out.missed_total;
            }
        }
        for (const auto& e : predictions[k].events) {
            if (!gt.contains(e.trigger)) {
                ++incorrect[e.type];
                ++out.incorrect_total;
            }
        }
    }
    auto shares = [](const std::map<std::string, std::size_t>& counts, std::size_t total) {
        std::vector<ErrorShare> v;
        for (const auto& [label, c] : counts) v.push_back({label, c, 100.0 * static_cast<double>(c) / total});
        std::ranges::stable_sort(v, [](const auto& a, const auto& b) { return a.count > b.count; });
        return v;
    };
    out.missed = shares(missed, out.missed_total);
    out.incorrect = shares(incorrect, out.incorrect_total);
    for (const auto& entry : score(predictions, gold).role_confusions) out.role_confusions.push_back(entry);
    std::ranges::stable_sort(out.role_confusions, [](const auto& a, const auto& b) { return a.second > b.second; });
    if (out.role_confusions.size() > top_k) out.role_confusions.resize(top_k);
    return out;
}

inline json prf_to_json(const Prf& m) {
    return {{"precision", m.precision()}, {"recall", m.recall()}, {"f1", m.f1()},
            {"correct", m.correct},       {"predicted", m.predicted}, {"gold", m.gold}};
}

inline const std::vector<std::pair<std::string, const Prf EvalReport::*>>& metric_families() {
    static const std::vector<std::pair<std::string, const Prf EvalReport::*>> families = {
        {"Entity Mention", &EvalReport::entity},
        {"Event Trigger Identification", &EvalReport::trigger_identification},
        {"Event Trigger Classification", &EvalReport::trigger_classification},
        {"Event Argument Identification", &EvalReport::argument_identification},
        {"Argument Role Classification", &EvalReport::role_classification},
    };
    return families;
}

inline json report_to_json(const EvalReport& r) {
    json j;
    for (const auto& [name, member] : metric_families()) j[name] = prf_to_json(r.*member);
    return j;
}

// One line per metric family: name, P, R, F (percent), then raw counts.
inline std::string format_report(const EvalReport& r) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-32s %7s %7s %7s  %s\n", "Metric", "P", "R", "F", "correct/pred/gold");
    out << line;
    for (const auto& [name, member] : metric_families()) {
        const Prf& m = r.*member;
        std::snprintf(line, sizeof line, "%-32s %7.2f %7.2f %7.2f  %zu/%zu/%zu\n", name.c_str(),
                      100.0 * m.precision(), 100.0 * m.recall(), 100.0 * m.f1(), m.correct, m.predicted,
                      m.gold);
        out << line;
    }
    return out.str();
}

inline std::string format_errors(const ErrorReport& e) {
    std::ostringstream out;
    char line[256];
    out << "MISSED (" << e.missed_total << ")\n";
    for (const auto& s : e.missed) {
        std::snprintf(line, sizeof line, "  %-28s %6.1f%%\n", s.label.c_str(), s.percent);
        out << line;
    }
    out << "INCORRECT (" << e.incorrect_total << ")\n";
    for (const auto& s : e.incorrect) {
        std::snprintf(line, sizeof line, "  %-28s %6.1f%%\n", s.label.c_str(), s.percent);
        out << line;
    }
    out << "Role confusions (gold -> predicted)\n";
    for (const auto& [pair, count] : e.role_confusions) {
        out << "  " << pair.first << " -> " << pair.second << "  " << count << '\n';
    }
    return out.str();
}

}  // namespace joint3ee
