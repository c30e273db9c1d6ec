#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace joint3ee {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? "," : "") << shape[i];
    }
    out << ']';
    return out.str();
}

class Tape;

namespace detail {

struct TensorData {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until first touched
    bool requires_grad = false;
    std::string name;
    const Tape* producer = nullptr;

    std::vector<double>& grad_buffer() {
        if (grad.empty()) {
            grad.assign(value.size(), 0.0);
        }
        return grad;
    }
};

}  // namespace detail

// Dense row-major array of doubles. A Tensor is a cheap handle; copies
// share storage. Parameters own a persistent gradient buffer that
// accumulates across tapes until zero_grad() is called.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(std::vector<double> values) {
        Shape shape{values.size()};
        return Tensor(std::move(shape), std::move(values), false, {});
    }

    static Tensor constant(Shape shape, std::vector<double> values) {
        return Tensor(std::move(shape), std::move(values), false, {});
    }

    static Tensor scalar(double v) { return Tensor(Shape{}, {v}, false, {}); }

    static Tensor parameter(std::string name, Shape shape, std::vector<double> values) {
        return Tensor(std::move(shape), std::move(values), true, std::move(name));
    }

    static Tensor parameter(std::string name, Shape shape) {
        std::vector<double> values(shape_size(shape), 0.0);
        return parameter(std::move(name), std::move(shape), std::move(values));
    }

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return data_->shape; }
    std::size_t rank() const { return data_->shape.size(); }
    std::size_t size() const { return data_->value.size(); }
    std::size_t rows() const { return rank() == 2 ? data_->shape[0] : size(); }
    std::size_t cols() const { return rank() == 2 ? data_->shape[1] : 1; }
    bool is_scalar() const { return rank() == 0; }
    bool is_vector() const { return rank() == 1; }
    bool is_matrix() const { return rank() == 2; }

    const std::string& name() const { return data_->name; }
    bool requires_grad() const { return data_->requires_grad; }

    std::span<const double> values() const { return data_->value; }
    std::span<double> mutable_values() { return data_->value; }
    double operator[](std::size_t i) const { return data_->value[i]; }
    double item() const {
        if (size() != 1) {
            throw ContractError("item() on tensor of shape " + shape_string(shape()));
        }
        return data_->value[0];
    }

    // Gradient buffer; allocated as zeros on first access.
    std::span<double> grad() const { return data_->grad_buffer(); }
    bool has_grad() const { return !data_->grad.empty(); }
    void zero_grad() {
        std::fill(data_->grad.begin(), data_->grad.end(), 0.0);
    }

    bool same_storage(const Tensor& other) const { return data_ == other.data_; }

private:
    friend class Tape;

    Tensor(Shape shape, std::vector<double> values, bool requires_grad, std::string name)
        : data_(std::make_shared<detail::TensorData>()) {
        if (shape_size(shape) != values.size()) {
            throw DimensionError("tensor of shape " + shape_string(shape) + " given " +
                                 std::to_string(values.size()) + " values");
        }
        data_->shape = std::move(shape);
        data_->value = std::move(values);
        data_->requires_grad = requires_grad;
        data_->name = std::move(name);
    }

    std::shared_ptr<detail::TensorData> data_;
};

enum class Activation { sigmoid, tanh, relu };

// Records primitive operations of one forward pass and replays them in
// reverse on backward(). A tape is used for a single backward pass.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    std::size_t size() const { return ops_.size(); }

    // W * x + b
    Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b) {
        if (!W.is_matrix() || !x.is_vector() || !b.is_vector() || W.cols() != x.size() ||
            W.rows() != b.size()) {
            throw DimensionError("affine: W " + shape_string(W.shape()) + ", x " +
                                 shape_string(x.shape()) + ", b " + shape_string(b.shape()));
        }
        return matvec_impl(W, x, &b);
    }

    // W * x
    Tensor matvec(const Tensor& W, const Tensor& x) {
        if (!W.is_matrix() || !x.is_vector() || W.cols() != x.size()) {
            throw DimensionError("matvec: W " + shape_string(W.shape()) + ", x " +
                                 shape_string(x.shape()));
        }
        return matvec_impl(W, x, nullptr);
    }

    Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::add); }
    Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::sub); }
    Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::mul); }

    Tensor scale(const Tensor& a, double c) {
        std::vector<double> out(a.size());
        std::ranges::transform(a.values(), out.begin(), [c](double v) { return c * v; });
        Tensor y = make_output(a.shape(), std::move(out), a.requires_grad());
        if (y.requires_grad()) {
            record([a, y, c] {
                auto gy = y.grad();
                auto ga = a.grad();
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += c * gy[i];
            });
        }
        return y;
    }

    Tensor elementwise(const Tensor& x, Activation kind) {
        std::vector<double> out(x.size());
        auto xs = x.values();
        for (std::size_t i = 0; i < out.size(); ++i) {
            switch (kind) {
                case Activation::sigmoid: out[i] = sigmoid_value(xs[i]); break;
                case Activation::tanh: out[i] = std::tanh(xs[i]); break;
                case Activation::relu: out[i] = xs[i] > 0.0 ? xs[i] : 0.0; break;
            }
        }
        Tensor y = make_output(x.shape(), std::move(out), x.requires_grad());
        if (y.requires_grad()) {
            record([x, y, kind] {
                auto gy = y.grad();
                auto gx = x.grad();
                auto ys = y.values();
                auto xs = x.values();
                for (std::size_t i = 0; i < gx.size(); ++i) {
                    double d = 0.0;
                    switch (kind) {
                        case Activation::sigmoid: d = ys[i] * (1.0 - ys[i]); break;
                        case Activation::tanh: d = 1.0 - ys[i] * ys[i]; break;
                        case Activation::relu: d = xs[i] > 0.0 ? 1.0 : 0.0; break;
                    }
                    gx[i] += d * gy[i];
                }
            });
        }
        return y;
    }

    Tensor sigmoid(const Tensor& x) { return elementwise(x, Activation::sigmoid); }
    Tensor tanh(const Tensor& x) { return elementwise(x, Activation::tanh); }
    Tensor relu(const Tensor& x) { return elementwise(x, Activation::relu); }

    Tensor softmax(const Tensor& logits) {
        if (!logits.is_vector() || logits.size() == 0) {
            throw DimensionError("softmax: expected non-empty vector, got " +
                                 shape_string(logits.shape()));
        }
        Tensor y = make_output(logits.shape(), softmax_values(logits.values()),
                               logits.requires_grad());
        if (y.requires_grad()) {
            record([logits, y] {
                auto gy = y.grad();
                auto ys = y.values();
                double dot = 0.0;
                for (std::size_t i = 0; i < ys.size(); ++i) dot += gy[i] * ys[i];
                auto gx = logits.grad();
                for (std::size_t i = 0; i < ys.size(); ++i) gx[i] += ys[i] * (gy[i] - dot);
            });
        }
        return y;
    }

    // -log softmax(logits)[target], computed through log-sum-exp.
    Tensor cross_entropy(const Tensor& logits, std::size_t target) {
        if (!logits.is_vector() || target >= logits.size()) {
            throw DimensionError("cross_entropy: target " + std::to_string(target) +
                                 " for logits " + shape_string(logits.shape()));
        }
        auto xs = logits.values();
        const double m = *std::ranges::max_element(xs);
        double z = 0.0;
        for (double v : xs) z += std::exp(v - m);
        const double lse = m + std::log(z);
        Tensor y = make_output(Shape{}, {lse - xs[target]}, logits.requires_grad());
        if (y.requires_grad()) {
            record([logits, y, target] {
                const double g = y.grad()[0];
                auto probs = softmax_values(logits.values());
                auto gx = logits.grad();
                for (std::size_t i = 0; i < gx.size(); ++i) {
                    gx[i] += g * (probs[i] - (i == target ? 1.0 : 0.0));
                }
            });
        }
        return y;
    }

    Tensor concat(std::span<const Tensor> parts) {
        std::vector<double> out;
        bool rg = false;
        for (const auto& p : parts) {
            if (!p.is_vector()) {
                throw DimensionError("concat: part has shape " + shape_string(p.shape()));
            }
            out.insert(out.end(), p.values().begin(), p.values().end());
            rg = rg || p.requires_grad();
        }
        const std::size_t width = out.size();
        Tensor y = make_output(Shape{width}, std::move(out), rg);
        if (y.requires_grad()) {
            std::vector<Tensor> held(parts.begin(), parts.end());
            record([held = std::move(held), y] {
                auto gy = y.grad();
                std::size_t offset = 0;
                for (const auto& p : held) {
                    if (p.requires_grad()) {
                        auto gp = p.grad();
                        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += gy[offset + i];
                    }
                    offset += p.size();
                }
            });
        }
        return y;
    }

    Tensor concat(std::initializer_list<Tensor> parts) {
        return concat(std::span<const Tensor>(parts.begin(), parts.size()));
    }

    // Row `index` of a matrix as a vector (embedding lookup).
    Tensor row(const Tensor& table, std::size_t index) {
        if (!table.is_matrix() || index >= table.rows()) {
            throw DimensionError("row: index " + std::to_string(index) + " into " +
                                 shape_string(table.shape()));
        }
        const std::size_t width = table.cols();
        auto src = table.values().subspan(index * width, width);
        Tensor y = make_output(Shape{width}, std::vector<double>(src.begin(), src.end()),
                               table.requires_grad());
        if (y.requires_grad()) {
            record([table, y, index, width] {
                auto gy = y.grad();
                auto gt = table.grad();
                for (std::size_t i = 0; i < width; ++i) gt[index * width + i] += gy[i];
            });
        }
        return y;
    }

    Tensor sum(const Tensor& x) {
        double total = 0.0;
        for (double v : x.values()) total += v;
        Tensor y = make_output(Shape{}, {total}, x.requires_grad());
        if (y.requires_grad()) {
            record([x, y] {
                const double g = y.grad()[0];
                for (double& gx : x.grad()) gx += g;
            });
        }
        return y;
    }

    // Sum of scalars, in order.
    Tensor sum(std::span<const Tensor> scalars) {
        double total = 0.0;
        bool rg = false;
        for (const auto& s : scalars) {
            total += s.item();
            rg = rg || s.requires_grad();
        }
        Tensor y = make_output(Shape{}, {total}, rg);
        if (y.requires_grad()) {
            std::vector<Tensor> held(scalars.begin(), scalars.end());
            record([held = std::move(held), y] {
                const double g = y.grad()[0];
                for (const auto& s : held) {
                    if (s.requires_grad()) s.grad()[0] += g;
                }
            });
        }
        return y;
    }

    Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

    // Populates gradients of every tensor the scalar `loss` depends on.
    void backward(const Tensor& loss) {
        if (!loss.defined() || !loss.is_scalar()) {
            throw ContractError("backward: loss must be a scalar, got " +
                                (loss.defined() ? shape_string(loss.shape()) : "undefined"));
        }
        if (loss.data_->producer != this) {
            throw ContractError("backward: loss was not produced by this tape");
        }
        if (consumed_) {
            throw ContractError("backward: tape already replayed");
        }
        consumed_ = true;
        if (!loss.requires_grad()) return;
        loss.grad()[0] += 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    static double sigmoid_value(double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    }

    static std::vector<double> softmax_values(std::span<const double> xs) {
        const double m = *std::ranges::max_element(xs);
        std::vector<double> out(xs.size());
        double z = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out[i] = std::exp(xs[i] - m);
            z += out[i];
        }
        for (double& v : out) v /= z;
        return out;
    }

private:
    enum class BinaryKind { add, sub, mul };

    Tensor make_output(Shape shape, std::vector<double> values, bool requires_grad) {
        Tensor t(std::move(shape), std::move(values), requires_grad, {});
        t.data_->producer = this;
        return t;
    }

    void record(std::function<void()> op) { ops_.push_back(std::move(op)); }

    Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind) {
        if (a.shape() != b.shape()) {
            throw DimensionError("elementwise op: " + shape_string(a.shape()) + " vs " +
                                 shape_string(b.shape()));
        }
        auto as = a.values();
        auto bs = b.values();
        std::vector<double> out(as.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            switch (kind) {
                case BinaryKind::add: out[i] = as[i] + bs[i]; break;
                case BinaryKind::sub: out[i] = as[i] - bs[i]; break;
                case BinaryKind::mul: out[i] = as[i] * bs[i]; break;
            }
        }
        Tensor y = make_output(a.shape(), std::move(out), a.requires_grad() || b.requires_grad());
        if (y.requires_grad()) {
            record([a, b, y, kind] {
                auto gy = y.grad();
                if (a.requires_grad()) {
                    auto ga = a.grad();
                    for (std::size_t i = 0; i < gy.size(); ++i) {
                        ga[i] += kind == BinaryKind::mul ? gy[i] * b[i] : gy[i];
                    }
                }
                if (b.requires_grad()) {
                    auto gb = b.grad();
                    for (std::size_t i = 0; i < gy.size(); ++i) {
                        switch (kind) {
                            case BinaryKind::add: gb[i] += gy[i]; break;
                            case BinaryKind::sub: gb[i] -= gy[i]; break;
                            case BinaryKind::mul: gb[i] += gy[i] * a[i]; break;
                        }
                    }
                }
            });
        }
        return y;
    }

    // Inputs are often sparse binary feature vectors, so only nonzero
    // columns are visited in both directions.
    Tensor matvec_impl(const Tensor& W, const Tensor& x, const Tensor* b) {
        const std::size_t out_dim = W.rows();
        const std::size_t in_dim = W.cols();
        auto ws = W.values();
        auto xs = x.values();
        std::vector<std::size_t> nz;
        nz.reserve(in_dim);
        for (std::size_t k = 0; k < in_dim; ++k) {
            if (xs[k] != 0.0) nz.push_back(k);
        }
        std::vector<double> out(out_dim, 0.0);
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double* wrow = ws.data() + o * in_dim;
            double acc = b ? (*b)[o] : 0.0;
            for (std::size_t k : nz) acc += wrow[k] * xs[k];
            out[o] = acc;
        }
        const bool rg = W.requires_grad() || x.requires_grad() || (b && b->requires_grad());
        Tensor y = make_output(Shape{out_dim}, std::move(out), rg);
        if (y.requires_grad()) {
            Tensor bias = b ? *b : Tensor();
            record([W, x, bias, y, nz = std::move(nz), out_dim, in_dim] {
                auto gy = y.grad();
                if (W.requires_grad()) {
                    auto gw = W.grad();
                    auto xs = x.values();
                    for (std::size_t o = 0; o < out_dim; ++o) {
                        const double g = gy[o];
                        if (g == 0.0) continue;
                        double* grow = gw.data() + o * in_dim;
                        for (std::size_t k : nz) grow[k] += g * xs[k];
                    }
                }
                if (x.requires_grad()) {
                    auto gx = x.grad();
                    auto ws = W.values();
                    for (std::size_t o = 0; o < out_dim; ++o) {
                        const double g = gy[o];
                        if (g == 0.0) continue;
                        const double* wrow = ws.data() + o * in_dim;
                        for (std::size_t k = 0; k < in_dim; ++k) gx[k] += wrow[k] * g;
                    }
                }
                if (bias.defined() && bias.requires_grad()) {
                    auto gb = bias.grad();
                    for (std::size_t o = 0; o < out_dim; ++o) gb[o] += gy[o];
                }
            });
        }
        return y;
    }

    std::vector<std::function<void()>> ops_;
    bool consumed_ = false;
};

}  // namespace joint3ee
