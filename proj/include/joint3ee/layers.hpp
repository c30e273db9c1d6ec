#pragma once

#include <string>
#include <vector>

#include "random.hpp"
#include "tensor.hpp"

namespace joint3ee {

inline Tensor uniform_parameter(std::string name, Shape shape, double range, Rng& rng) {
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = rng.uniform(-range, range);
    return Tensor::parameter(std::move(name), std::move(shape), std::move(values));
}

inline Tensor zero_parameter(std::string name, Shape shape) {
    return Tensor::parameter(std::move(name), std::move(shape));
}

// Inverted dropout. The mask is sampled outside the tape and applied as a
// constant elementwise product, so inference needs no rescaling.
struct Dropout {
    double rate = 0.0;
    Rng* rng = nullptr;

    bool active() const { return rng != nullptr && rate > 0.0; }

    Tensor apply(Tape& tape, const Tensor& x) const {
        if (!active()) return x;
        const double keep = 1.0 - rate;
        std::vector<double> mask(x.size());
        for (double& m : mask) m = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        return tape.mul(x, Tensor::constant(x.shape(), std::move(mask)));
    }
};

// One tanh hidden layer followed by a linear output; softmax is applied by
// the caller (or folded into cross_entropy).
struct FeedForward {
    Tensor hidden_weight, hidden_bias, output_weight, output_bias;

    static FeedForward make(const std::string& prefix, std::size_t input, std::size_t hidden,
                            std::size_t output, double range, Rng& rng) {
        return {uniform_parameter(prefix + ".W1", {hidden, input}, range, rng),
                zero_parameter(prefix + ".b1", {hidden}),
                uniform_parameter(prefix + ".W2", {output, hidden}, range, rng),
                zero_parameter(prefix + ".b2", {output})};
    }

    std::size_t input_width() const { return hidden_weight.cols(); }
    std::size_t output_width() const { return output_weight.rows(); }

    Tensor logits(Tape& tape, const Tensor& x, const Dropout& dropout) const {
        Tensor h = tape.tanh(tape.affine(x, hidden_weight, hidden_bias));
        h = dropout.apply(tape, h);
        return tape.affine(h, output_weight, output_bias);
    }

    std::vector<Tensor> parameters() const {
        return {hidden_weight, hidden_bias, output_weight, output_bias};
    }
};

}  // namespace joint3ee
