#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "eofp/dataset.hpp"
#include "eofp/tensor.hpp"

namespace eofp {

enum class Activation { Tanh, Relu, Linear };

struct DenseLayer {
    uint32_t in = 0;
    uint32_t out = 0;
    Activation act = Activation::Linear;
    std::vector<float> weights;  // out x in, row major
    std::vector<float> biases;   // out
};

struct ToyNetwork {
    std::vector<DenseLayer> layers;

    uint32_t input_size() const { return layers.front().in; }
    uint32_t output_size() const { return layers.back().out; }

    size_t parameter_count() const {
        size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.biases.size();
        return n;
    }
};

// Glorot-uniform weights, zero biases; tanh on hidden layers, linear output.
inline ToyNetwork make_network(uint32_t seed, std::span<const uint32_t> widths) {
    if (widths.size() < 2) throw std::invalid_argument("make_network: need >= 2 widths");
    std::mt19937 rng(seed);
    ToyNetwork net;
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.in = widths[l];
        layer.out = widths[l + 1];
        layer.act = (l + 2 < widths.size()) ? Activation::Tanh : Activation::Linear;
        layer.weights.resize(static_cast<size_t>(layer.in) * layer.out);
        layer.biases.assign(layer.out, 0.0f);
        const float limit = std::sqrt(6.0f / static_cast<float>(layer.in + layer.out));
        for (auto& w : layer.weights) w = uniform(rng, -limit, limit);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

inline float activate(float x, Activation a) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0.0f ? x : 0.0f;
        case Activation::Linear: return x;
    }
    return x;
}

// Derivative expressed through the post-activation value.
inline float activate_grad(float y, Activation a) {
    switch (a) {
        case Activation::Tanh: return 1.0f - y * y;
        case Activation::Relu: return y > 0.0f ? 1.0f : 0.0f;
        case Activation::Linear: return 1.0f;
    }
    return 1.0f;
}

// Per-sample activations plus accumulated gradients for one minibatch.
struct Workspace {
    std::vector<std::vector<float>> act;     // act[0] is the input
    std::vector<std::vector<float>> delta;   // per-layer output error
    std::vector<std::vector<float>> grad_w;  // accumulated, mirrors layers
    std::vector<std::vector<float>> grad_b;

    explicit Workspace(const ToyNetwork& net) {
        act.resize(net.layers.size() + 1);
        act[0].resize(net.layers.front().in);
        delta.resize(net.layers.size());
        for (size_t l = 0; l < net.layers.size(); ++l) {
            act[l + 1].resize(net.layers[l].out);
            delta[l].resize(net.layers[l].out);
            grad_w.emplace_back(net.layers[l].weights.size(), 0.0f);
            grad_b.emplace_back(net.layers[l].biases.size(), 0.0f);
        }
    }

    void zero_gradients() {
        for (auto& g : grad_w) std::fill(g.begin(), g.end(), 0.0f);
        for (auto& g : grad_b) std::fill(g.begin(), g.end(), 0.0f);
    }
};

inline std::span<const float> forward(const ToyNetwork& net, std::span<const float> input,
                                      Workspace& ws) {
    if (input.size() != ws.act[0].size())
        throw std::invalid_argument("forward: input length does not match the network");
    std::copy(input.begin(), input.end(), ws.act[0].begin());
    for (size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& layer = net.layers[l];
        const std::vector<float>& x = ws.act[l];
        std::vector<float>& y = ws.act[l + 1];
        for (uint32_t o = 0; o < layer.out; ++o) {
            const float* w = layer.weights.data() + static_cast<size_t>(o) * layer.in;
            float acc = layer.biases[o];
            for (uint32_t i = 0; i < layer.in; ++i) acc += w[i] * x[i];
            y[o] = activate(acc, layer.act);
        }
    }
    return ws.act.back();
}

// MSE backward pass for the most recent forward; gradients accumulate into
// the workspace. Returns the sample's mean squared error.
inline double backward(const ToyNetwork& net, std::span<const float> target, Workspace& ws) {
    const size_t last = net.layers.size() - 1;
    double se = 0.0;
    {
        const std::vector<float>& y = ws.act[last + 1];
        const Activation a = net.layers[last].act;
        for (size_t o = 0; o < y.size(); ++o) {
            const float diff = y[o] - target[o];
            se += static_cast<double>(diff) * diff;
            // d(MSE)/dy scaled by 2/len, folded into the output delta.
            ws.delta[last][o] =
                (2.0f / static_cast<float>(y.size())) * diff * activate_grad(y[o], a);
        }
    }
    for (size_t l = last + 1; l-- > 0;) {
        const DenseLayer& layer = net.layers[l];
        const std::vector<float>& x = ws.act[l];
        const std::vector<float>& d = ws.delta[l];
        for (uint32_t o = 0; o < layer.out; ++o) {
            float* gw = ws.grad_w[l].data() + static_cast<size_t>(o) * layer.in;
            for (uint32_t i = 0; i < layer.in; ++i) gw[i] += d[o] * x[i];
            ws.grad_b[l][o] += d[o];
        }
        if (l > 0) {
            const Activation a = net.layers[l - 1].act;
            std::vector<float>& dprev = ws.delta[l - 1];
            for (uint32_t i = 0; i < layer.in; ++i) {
                float acc = 0.0f;
                for (uint32_t o = 0; o < layer.out; ++o)
                    acc += layer.weights[static_cast<size_t>(o) * layer.in + i] * d[o];
                dprev[i] = acc * activate_grad(ws.act[l][i], a);
            }
        }
    }
    return se / static_cast<double>(ws.act[last + 1].size());
}

inline void apply_gradients(ToyNetwork& net, const Workspace& ws, float step) {
    for (size_t l = 0; l < net.layers.size(); ++l) {
        DenseLayer& layer = net.layers[l];
        for (size_t i = 0; i < layer.weights.size(); ++i)
            layer.weights[i] -= step * ws.grad_w[l][i];
        for (size_t i = 0; i < layer.biases.size(); ++i)
            layer.biases[i] -= step * ws.grad_b[l][i];
    }
}

// The network's parameters as one model: per layer, a weight matrix tensor
// {out, in} followed by a bias vector tensor {out}.
inline RawModel to_model(const ToyNetwork& net) {
    RawModel model;
    for (const DenseLayer& l : net.layers) {
        model.push_back({{l.out, l.in}, l.weights});
        model.push_back({{l.out}, l.biases});
    }
    return model;
}

inline void load_model(ToyNetwork& net, const RawModel& model) {
    if (model.size() != net.layers.size() * 2)
        throw std::invalid_argument("load_model: tensor count mismatch");
    for (size_t l = 0; l < net.layers.size(); ++l) {
        const Tensor& w = model[2 * l];
        const Tensor& b = model[2 * l + 1];
        if (w.values.size() != net.layers[l].weights.size() ||
            b.values.size() != net.layers[l].biases.size())
            throw std::invalid_argument("load_model: tensor size mismatch");
        net.layers[l].weights = w.values;
        net.layers[l].biases = b.values;
    }
}

}  // namespace eofp
