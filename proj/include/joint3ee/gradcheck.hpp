#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "random.hpp"
#include "tensor.hpp"

namespace joint3ee {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    std::size_t coordinates_checked = 0;
    // Per-parameter maximum, in the order parameters were given.
    std::vector<std::pair<std::string, double>> per_parameter;
};

struct GradCheckOptions {
    double step = 1e-5;
    // 0 checks every coordinate; otherwise this many are sampled per parameter.
    std::size_t max_coordinates_per_parameter = 0;
    std::uint64_t sampling_seed = 1;
    // Test hook: added to every analytic gradient read (negative control).
    double analytic_bias = 0.0;
};

// Compares reverse-mode gradients of a scalar function against central
// finite differences. `f` builds the loss on the tape it is given and must
// be deterministic. Relative error per coordinate is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
inline GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& f,
                                       std::span<Tensor> params,
                                       const GradCheckOptions& options = {}) {
    GradCheckResult result;
    if (params.empty()) return result;

    for (auto& p : params) p.zero_grad();
    {
        Tape tape;
        Tensor loss = f(tape);
        tape.backward(loss);
    }
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) {
        auto g = p.grad();
        analytic.emplace_back(g.begin(), g.end());
    }

    auto evaluate = [&f] {
        Tape tape;
        return f(tape).item();
    };

    Rng rng(options.sampling_seed);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi];
        std::vector<std::size_t> coords(p.size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.max_coordinates_per_parameter != 0 &&
            coords.size() > options.max_coordinates_per_parameter) {
            rng.shuffle(coords);
            coords.resize(options.max_coordinates_per_parameter);
            std::ranges::sort(coords);
        }
        double worst_here = 0.0;
        auto values = p.mutable_values();
        for (std::size_t idx : coords) {
            const double saved = values[idx];
            values[idx] = saved + options.step;
            const double plus = evaluate();
            values[idx] = saved - options.step;
            const double minus = evaluate();
            values[idx] = saved;
            const double numeric = (plus - minus) / (2.0 * options.step);
            const double a = analytic[pi][idx] + options.analytic_bias;
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            const double rel = std::abs(a - numeric) / denom;
            ++result.coordinates_checked;
            worst_here = std::max(worst_here, rel);
            if (rel > result.max_relative_error || result.worst_parameter.empty()) {
                result.max_relative_error = rel;
                result.worst_parameter = p.name();
                result.worst_index = idx;
            }
        }
        result.per_parameter.emplace_back(p.name(), worst_here);
    }
    for (auto& p : params) p.zero_grad();
    return result;
}

}  // namespace joint3ee
