#pragma once

#include <string>
#include <vector>

#include "layers.hpp"
#include "tensor.hpp"

namespace joint3ee {

// Gate weights for one direction. W_* act on the input, U_* on the
// previous state.
struct GruDirection {
    Tensor Wz, Uz, bz;
    Tensor Wr, Ur, br;
    Tensor Wh, Uh, bh;

    static GruDirection make(const std::string& prefix, std::size_t input, std::size_t hidden,
                             double range, Rng& rng) {
        GruDirection d;
        d.Wz = uniform_parameter(prefix + ".Wz", {hidden, input}, range, rng);
        d.Uz = uniform_parameter(prefix + ".Uz", {hidden, hidden}, range, rng);
        d.bz = zero_parameter(prefix + ".bz", {hidden});
        d.Wr = uniform_parameter(prefix + ".Wr", {hidden, input}, range, rng);
        d.Ur = uniform_parameter(prefix + ".Ur", {hidden, hidden}, range, rng);
        d.br = zero_parameter(prefix + ".br", {hidden});
        d.Wh = uniform_parameter(prefix + ".Wh", {hidden, input}, range, rng);
        d.Uh = uniform_parameter(prefix + ".Uh", {hidden, hidden}, range, rng);
        d.bh = zero_parameter(prefix + ".bh", {hidden});
        return d;
    }

    std::size_t input_size() const { return Wz.cols(); }
    std::size_t hidden_size() const { return Uz.rows(); }

    std::vector<Tensor> parameters() const { return {Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh}; }
};

struct GruParams {
    GruDirection forward;
    GruDirection backward;

    static GruParams make(std::size_t input, std::size_t hidden, double range, Rng& rng) {
        GruParams p;
        p.forward = GruDirection::make("gru.fw", input, hidden, range, rng);
        p.backward = GruDirection::make("gru.bw", input, hidden, range, rng);
        return p;
    }

    std::size_t hidden_size() const { return forward.hidden_size(); }
    std::size_t output_size() const { return 2 * hidden_size(); }

    std::vector<Tensor> parameters() const {
        auto out = forward.parameters();
        auto bw = backward.parameters();
        out.insert(out.end(), bw.begin(), bw.end());
        return out;
    }
};

// z = sigmoid(Wz x + Uz h + bz)
// r = sigmoid(Wr x + Ur h + br)
// c = tanh(Wh x + Uh (r * h) + bh)
// h' = (1 - z) * h + z * c
inline Tensor gru_cell(Tape& tape, const GruDirection& p, const Tensor& x, const Tensor& h_prev) {
    if (x.size() != p.input_size() || h_prev.size() != p.hidden_size()) {
        throw DimensionError("gru_cell: input " + shape_string(x.shape()) + ", state " +
                             shape_string(h_prev.shape()) + " for cell " +
                             std::to_string(p.input_size()) + "->" + std::to_string(p.hidden_size()));
    }
    Tensor z = tape.sigmoid(tape.add(tape.affine(x, p.Wz, p.bz), tape.matvec(p.Uz, h_prev)));
    Tensor r = tape.sigmoid(tape.add(tape.affine(x, p.Wr, p.br), tape.matvec(p.Ur, h_prev)));
    Tensor c = tape.tanh(tape.add(tape.affine(x, p.Wh, p.bh), tape.matvec(p.Uh, tape.mul(r, h_prev))));
    return tape.add(h_prev, tape.mul(z, tape.sub(c, h_prev)));
}

// Left-to-right and right-to-left passes from zero states; h_i is the
// concatenation of both states at position i.
inline std::vector<Tensor> encode_bidirectional(Tape& tape, const GruParams& params,
                                                std::span<const Tensor> inputs) {
    const std::size_t n = inputs.size();
    if (n == 0) throw ContractError("encode_bidirectional: empty sentence");
    const std::size_t hidden = params.hidden_size();
    const Tensor zero = Tensor::constant(std::vector<double>(hidden, 0.0));

    std::vector<Tensor> fw(n), bw(n);
    Tensor state = zero;
    for (std::size_t i = 0; i < n; ++i) {
        state = gru_cell(tape, params.forward, inputs[i], state);
        fw[i] = state;
    }
    state = zero;
    for (std::size_t i = n; i-- > 0;) {
        state = gru_cell(tape, params.backward, inputs[i], state);
        bw[i] = state;
    }
    std::vector<Tensor> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = tape.concat({fw[i], bw[i]});
    return out;
}

}  // namespace joint3ee
