#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "tensor.hpp"

namespace joint3ee {

// Binary record of the event types and roles assigned before the current
// step of the left-to-right scan. Layout: [event types | roles].
class MemoryVector {
public:
    MemoryVector(std::size_t event_types, std::size_t roles)
        : events_(event_types), bits_(event_types + roles, 0.0) {}

    void mark_event(std::size_t type) {
        if (type != 0) bits_[type] = 1.0;
    }
    void mark_role(std::size_t role) {
        if (role != 0) bits_[events_ + role] = 1.0;
    }

    const std::vector<double>& bits() const { return bits_; }
    std::size_t size() const { return bits_.size(); }

    bool contains(const MemoryVector& earlier) const {
        for (std::size_t k = 0; k < bits_.size(); ++k) {
            if (earlier.bits_[k] != 0.0 && bits_[k] == 0.0) return false;
        }
        return true;
    }

private:
    std::size_t events_;
    std::vector<double> bits_;
};

// Hashed discrete features for a (trigger i, argument j) pair: signed
// distance bucket, context words around both tokens, words in between
// (short gaps only) and the shortest dependency path. Entity types never
// enter this vector.
class BijFeatureExtractor {
public:
    BijFeatureExtractor(std::size_t width = 1000, int window = 2, bool enabled = true,
                        std::uint64_t seed = 0x9e3779b97f4a7c15ULL)
        : width_(width), window_(window), enabled_(enabled), seed_(seed) {}

    bool enabled() const { return enabled_; }
    std::size_t width() const { return enabled_ ? width_ : 0; }
    std::size_t nominal_width() const { return width_; }
    int window() const { return window_; }
    std::uint64_t seed() const { return seed_; }

    static const char* distance_bucket(long d) {
        if (d <= -5) return "<=-5";
        if (d <= -2) return "-4..-2";
        if (d == -1) return "-1";
        if (d == 1) return "+1";
        if (d <= 4) return "+2..4";
        return ">=5";
    }

    // Feature strings before hashing; exposed for inspection and tests.
    std::vector<std::string> feature_names(const Sentence& s, std::size_t i, std::size_t j) const {
        std::vector<std::string> out;
        const long d = static_cast<long>(j) - static_cast<long>(i);
        out.push_back(std::string("dist=") + distance_bucket(d));
        const auto n = static_cast<long>(s.size());
        for (long k = -window_; k <= window_; ++k) {
            const long ti = static_cast<long>(i) + k;
            const long aj = static_cast<long>(j) + k;
            out.push_back("tw[" + std::to_string(k) + "]=" + (ti >= 0 && ti < n ? s.tokens[ti] : "<pad>"));
            out.push_back("aw[" + std::to_string(k) + "]=" + (aj >= 0 && aj < n ? s.tokens[aj] : "<pad>"));
        }
        const std::size_t lo = std::min(i, j), hi = std::max(i, j);
        if (hi - lo <= 5) {
            for (std::size_t k = lo + 1; k < hi; ++k) out.push_back("bw=" + s.tokens[k]);
        }
        if (s.has_deps()) {
            if (auto path = dependency_path(s, i, j)) {
                out.push_back("path=" + *path);
                out.push_back("pathlen=" + std::to_string(std::count(path->begin(), path->end(), '|')));
            }
        }
        return out;
    }

    std::vector<double> extract(const Sentence& s, std::size_t i, std::size_t j) const {
        std::vector<double> out(width(), 0.0);
        if (!enabled_) return out;
        for (const auto& f : feature_names(s, i, j)) out[hash(f) % width_] = 1.0;
        return out;
    }

    // Relation labels along the undirected tree path from i to j, with
    // ^ for steps toward the head and v for steps toward a dependent.
    static std::optional<std::string> dependency_path(const Sentence& s, std::size_t i, std::size_t j) {
        const std::size_t n = s.size();
        std::vector<std::vector<std::pair<std::size_t, std::string>>> adj(n);
        for (std::size_t k = 0; k < n; ++k) {
            const int h = s.deps[k].head;
            if (h < 0) continue;
            adj[k].push_back({static_cast<std::size_t>(h), "^" + s.deps[k].relation});
            adj[static_cast<std::size_t>(h)].push_back({k, "v" + s.deps[k].relation});
        }
        std::vector<std::size_t> prev(n, SIZE_MAX);
        std::vector<std::string> via(n);
        std::deque<std::size_t> queue{i};
        prev[i] = i;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            if (u == j) break;
            for (const auto& [v, label] : adj[u]) {
                if (prev[v] != SIZE_MAX) continue;
                prev[v] = u;
                via[v] = label;
                queue.push_back(v);
            }
        }
        if (prev[j] == SIZE_MAX) return std::nullopt;
        std::vector<std::string> steps;
        for (std::size_t v = j; v != i; v = prev[v]) steps.push_back(via[v]);
        std::string path;
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) path += *it + "|";
        return path;
    }

private:
    std::uint64_t hash(std::string_view text) const {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ seed_;
        for (unsigned char c : text) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::size_t width_;
    int window_;
    bool enabled_;
    std::uint64_t seed_;
};

// Block widths of the argument-role input vector
// [h_i, D_i, h_j, D_j, V(entity label), V(event type), M_i, B_ij].
struct ArpLayout {
    std::size_t hidden = 0;   // len(h)
    std::size_t context = 0;  // len(D)
    std::size_t bio = 0;
    std::size_t events = 0;
    std::size_t memory = 0;
    std::size_t bij = 0;

    std::size_t width() const { return 2 * hidden + 2 * context + bio + events + memory + bij; }
};

inline std::vector<double> one_hot(std::size_t index, std::size_t size) {
    if (index >= size) throw DimensionError("one_hot: index " + std::to_string(index) + " >= " + std::to_string(size));
    std::vector<double> v(size, 0.0);
    v[index] = 1.0;
    return v;
}

// Concatenates the argument-role representation in its fixed block order.
// `entity_label` is a BIO tag index, `event_label` an event type index.
inline Tensor build_arp_features(Tape& tape, const ArpLayout& layout, const Tensor& h_i,
                                 const Tensor& d_i, const Tensor& h_j, const Tensor& d_j,
                                 std::size_t entity_label, std::size_t event_label,
                                 const MemoryVector& memory, const std::vector<double>& bij) {
    if (h_i.size() != layout.hidden || h_j.size() != layout.hidden || d_i.size() != layout.context ||
        d_j.size() != layout.context || memory.size() != layout.memory || bij.size() != layout.bij) {
        throw DimensionError("build_arp_features: block widths do not match the layout");
    }
    std::vector<Tensor> parts{h_i,
                              d_i,
                              h_j,
                              d_j,
                              Tensor::constant(one_hot(entity_label, layout.bio)),
                              Tensor::constant(one_hot(event_label, layout.events)),
                              Tensor::constant(memory.bits())};
    if (layout.bij != 0) parts.push_back(Tensor::constant(bij));
    Tensor out = tape.concat(parts);
    if (out.size() != layout.width()) {
        throw DimensionError("build_arp_features: width " + std::to_string(out.size()) +
                             " != expected " + std::to_string(layout.width()));
    }
    return out;
}

}  // namespace joint3ee
