#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shapecx/nn.hpp"

namespace shapecx {

/// A named trainable tensor with its Adam moment buffers. The graph node is
/// shared: forward passes reference it, adam_step mutates it in place.
template <typename T>
struct Parameter {
    std::string name;
    NodePtr<T> node;
    Tensor<T> adam_m;
    Tensor<T> adam_v;
    int64_t step_count = 0;

    Tensor<T>& value() { return node->value; }
    const Tensor<T>& value() const { return node->value; }
};

template <typename T>
Parameter<T> make_parameter(std::string name, Tensor<T> init) {
    Parameter<T> p;
    p.name = std::move(name);
    p.adam_m = Tensor<T>(init.shape());
    p.adam_v = Tensor<T>(init.shape());
    p.node = make_leaf(std::move(init));
    return p;
}

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam update over all parameters; gradients are consumed
/// and cleared. A parameter without a populated gradient is a contract
/// violation (backward was not run, or the parameter is unused).
template <typename T>
void adam_step(std::vector<Parameter<T>>& params, const AdamConfig& cfg) {
    for (auto& p : params) {
        if (p.node->grad.empty())
            throw ContractError("adam_step: parameter '" + p.name + "' has no gradient");
        if (!p.node->grad.same_shape(p.node->value))
            throw ContractError("adam_step: gradient shape mismatch for '" + p.name + "'");

        p.step_count += 1;
        const T corr1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(p.step_count)));
        const T corr2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(p.step_count)));
        const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
        const T lr = static_cast<T>(cfg.lr), eps = static_cast<T>(cfg.eps);

        T* v = p.node->value.data();
        T* g = p.node->grad.data();
        T* m1 = p.adam_m.data();
        T* m2 = p.adam_v.data();
        const int n = p.node->value.size();
        for (int i = 0; i < n; ++i) {
            m1[i] = b1 * m1[i] + (T(1) - b1) * g[i];
            m2[i] = b2 * m2[i] + (T(1) - b2) * g[i] * g[i];
            const T mhat = m1[i] / corr1;
            const T vhat = m2[i] / corr2;
            v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        p.node->grad = Tensor<T>();
    }
}

} // namespace shapecx
