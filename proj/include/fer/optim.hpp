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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fer/layers.hpp"
#include "fer/tensor.hpp"

namespace fer {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    /// Coupled L2 decay: added to the gradient as weight_decay * param
    /// before the moment updates.
    double weight_decay = 1e-6;
};

/// Adam moments and step counter for one parameter tensor.
template <typename T>
struct AdamState {
    explicit AdamState(const Shape& shape, AdamConfig cfg = {})
        : m(shape), v(shape), config(cfg) {}

    Tensor<T> m;
    Tensor<T> v;
    std::uint64_t t = 0;
    AdamConfig config;
};

/// Applies one bias-corrected Adam update to param in place and advances
/// state.t by one. Throws ShapeError when param, grad and the moments differ
/// in shape.
template <typename T>
void adam_step(AdamState<T>& state, Tensor<T>& param, const Tensor<T>& grad);

/// One AdamState per registered parameter, stepped together.
template <typename T>
class Adam {
public:
    Adam(std::span<const ParamSlot<T>> params, AdamConfig config);

    /// Steps every parameter with its current gradient buffer. The slots must
    /// be the same, in the same order, as at construction.
    void step(std::span<const ParamSlot<T>> params);

    [[nodiscard]] const AdamConfig& config() const { return config_; }
    [[nodiscard]] const std::vector<AdamState<T>>& states() const { return states_; }

private:
    AdamConfig config_;
    std::vector<AdamState<T>> states_;
};

template <typename T>
struct LossResult {
    double loss;
    Tensor<T> grad_logits;
};

/// Mean categorical cross-entropy of softmax(logits) against integer labels,
/// computed with a stable log-sum-exp. The gradient is (p - onehot) / N.
/// Throws DataError for labels outside [0, K).
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

}  // namespace fer
