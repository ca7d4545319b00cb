// Copyright 2026-present the fercnn project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fer/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fer/simd/kernels.hpp"

namespace fer {

template <typename T>
void adam_step(AdamState<T>& state, Tensor<T>& param, const Tensor<T>& grad) {
    if (param.shape() != grad.shape() || state.m.shape() != param.shape() ||
        state.v.shape() != param.shape()) {
        throw ShapeError("adam_step: parameter " + to_string(param.shape()) + ", gradient " +
                         to_string(grad.shape()) + " and moments " + to_string(state.m.shape()) +
                         " must agree");
    }
    state.t += 1;
    const AdamConfig& cfg = state.config;
    const double t = static_cast<double>(state.t);
    const simd::AdamCoefficients<T> coef{
        static_cast<T>(cfg.lr),
        static_cast<T>(cfg.beta1),
        static_cast<T>(cfg.beta2),
        static_cast<T>(cfg.epsilon),
        static_cast<T>(cfg.weight_decay),
        static_cast<T>(1.0 - std::pow(cfg.beta1, t)),
        static_cast<T>(1.0 - std::pow(cfg.beta2, t)),
    };
    simd::adam_update<T>(param.values(), grad.values(), state.m.values(), state.v.values(), coef);
}

template <typename T>
Adam<T>::Adam(std::span<const ParamSlot<T>> params, AdamConfig config) : config_(config) {
    states_.reserve(params.size());
    for (const auto& p : params) states_.emplace_back(p.value->shape(), config);
}

template <typename T>
void Adam<T>::step(std::span<const ParamSlot<T>> params) {
    if (params.size() != states_.size()) {
        throw StateError("Adam::step: " + std::to_string(params.size()) +
                         " parameters given, optimizer was built for " +
                         std::to_string(states_.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) adam_step(states_[i], *params[i].value, *params[i].grad);
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
        throw ShapeError("softmax_cross_entropy: logits " + to_string(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    LossResult<T> result{0.0, Tensor<T>(logits.shape())};
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    std::vector<double> e(k);
    for (std::size_t r = 0; r < n; ++r) {
        const int label = labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= k) {
            throw DataError("softmax_cross_entropy: label " + std::to_string(label) + " at row " +
                            std::to_string(r) + " is outside [0," + std::to_string(k - 1) + "]");
        }
        const T* row = logits.data() + r * k;
        const double peak = *std::max_element(row, row + k);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            e[j] = std::exp(static_cast<double>(row[j]) - peak);
            sum += e[j];
        }
        const double log_sum = peak + std::log(sum);
        total += log_sum - static_cast<double>(row[label]);
        T* g = result.grad_logits.data() + r * k;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = e[j] / sum;
            g[j] = static_cast<T>((p - (static_cast<std::size_t>(label) == j ? 1.0 : 0.0)) * inv_n);
        }
    }
    result.loss = total * inv_n;
    return result;
}

#define FER_INSTANTIATE_OPTIM(T)                                              \
    template void adam_step(AdamState<T>&, Tensor<T>&, const Tensor<T>&);     \
    template class Adam<T>;                                                   \
    template LossResult<T> softmax_cross_entropy(const Tensor<T>&, std::span<const int>);

FER_INSTANTIATE_OPTIM(float)
FER_INSTANTIATE_OPTIM(double)

#undef FER_INSTANTIATE_OPTIM

}  // namespace fer
