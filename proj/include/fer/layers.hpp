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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fer/ops.hpp"
#include "fer/tensor.hpp"

namespace fer {

/// Train mode caches activations for backward and uses batch statistics in
/// BatchNorm; Infer mode is a pure function of the input and stored state.
enum class Mode { train, infer };

/// A learnable tensor together with the gradient buffer filled by backward.
template <typename T>
struct ParamSlot {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

/// Non-learnable persistent state, e.g. BatchNorm running statistics.
template <typename T>
struct BufferSlot {
    std::string name;
    Tensor<T>* value;
};

// ---------------------------------------------------------------------------
// Stateless building blocks.

/// Elementwise max(0, x).
template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Passes grad where input > 0; the derivative at exactly 0 is taken as 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad);

/// [N, d1, d2, ...] -> [N, d1*d2*...], preserving row-major order.
template <typename T>
Tensor<T> flatten(Tensor<T> x);

/// Inverse of flatten for a known original shape.
template <typename T>
Tensor<T> unflatten(Tensor<T> x, const Shape& shape);

/// Row-wise softmax of a [N,K] tensor, max-subtracted so large logits do not overflow.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

// ---------------------------------------------------------------------------
// Layers.

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    [[nodiscard]] virtual std::string_view kind() const = 0;

    /// One-line description of the layer's structure and hyperparameters.
    /// Model fingerprints are built from these.
    [[nodiscard]] virtual std::string describe() const = 0;

    /// Shape produced for a given input shape. Throws ShapeError.
    [[nodiscard]] virtual Shape output_shape(const Shape& input) const = 0;

    /// Takes the input by value so layers that keep it for backward can move
    /// it into their cache.
    virtual Tensor<T> forward(Tensor<T> x, Mode mode) = 0;

    /// Consumes the cache of the preceding Train-mode forward, fills the
    /// parameter gradients and returns the gradient with respect to the input.
    /// Throws StateError when there is no cache.
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

    virtual void init_params(std::uint64_t /*seed*/) {}
    virtual std::vector<ParamSlot<T>> params() { return {}; }
    virtual std::vector<BufferSlot<T>> buffers() { return {}; }
};

template <typename T>
class Conv2DLayer final : public Layer<T> {
public:
    Conv2DLayer(std::size_t kernel_h, std::size_t kernel_w, std::size_t in_channels,
                std::size_t out_channels);

    std::string_view kind() const override { return "conv2d"; }
    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void init_params(std::uint64_t seed) override;
    std::vector<ParamSlot<T>> params() override;

    Tensor<T>& kernels() { return kernels_; }
    Tensor<T>& bias() { return bias_; }
    [[nodiscard]] bool has_cache() const { return !cached_input_.empty(); }

private:
    Tensor<T> kernels_;
    Tensor<T> bias_;
    Tensor<T> grad_kernels_;
    Tensor<T> grad_bias_;
    Tensor<T> cached_input_;
};

/// Per-channel batch normalization over every axis but the last.
///
/// Train mode normalizes with the biased batch variance and folds the
/// unbiased estimate into the running variance:
///   running <- momentum * running + (1 - momentum) * batch.
template <typename T>
class BatchNormLayer final : public Layer<T> {
public:
    BatchNormLayer(std::size_t channels, double momentum, double epsilon);

    std::string_view kind() const override { return "batchnorm"; }
    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void init_params(std::uint64_t seed) override;
    std::vector<ParamSlot<T>> params() override;
    std::vector<BufferSlot<T>> buffers() override;

    Tensor<T>& gamma() { return gamma_; }
    Tensor<T>& beta() { return beta_; }
    Tensor<T>& running_mean() { return running_mean_; }
    Tensor<T>& running_var() { return running_var_; }
    [[nodiscard]] double momentum() const { return momentum_; }
    [[nodiscard]] double epsilon() const { return epsilon_; }

private:
    std::size_t channels_;
    double momentum_;
    double epsilon_;
    Tensor<T> gamma_, beta_;
    Tensor<T> grad_gamma_, grad_beta_;
    Tensor<T> running_mean_, running_var_;
    Tensor<T> cached_normalized_;
    std::vector<T> cached_inv_std_;
};

template <typename T>
class DenseLayer final : public Layer<T> {
public:
    DenseLayer(std::size_t in_features, std::size_t out_features);

    std::string_view kind() const override { return "dense"; }
    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void init_params(std::uint64_t seed) override;
    std::vector<ParamSlot<T>> params() override;

    Tensor<T>& weights() { return weights_; }
    Tensor<T>& bias() { return bias_; }

private:
    Tensor<T> weights_;
    Tensor<T> bias_;
    Tensor<T> grad_weights_;
    Tensor<T> grad_bias_;
    Tensor<T> cached_input_;
};

template <typename T>
class ReLULayer final : public Layer<T> {
public:
    std::string_view kind() const override { return "relu"; }
    std::string describe() const override { return "relu"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    Shape cached_shape_;
    std::vector<std::uint8_t> mask_;
};

template <typename T>
class MaxPoolLayer final : public Layer<T> {
public:
    std::string_view kind() const override { return "maxpool2d"; }
    std::string describe() const override { return "maxpool2d size=2 step=2"; }
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    std::optional<PoolIndex> index_;
};

template <typename T>
class FlattenLayer final : public Layer<T> {
public:
    std::string_view kind() const override { return "flatten"; }
    std::string describe() const override { return "flatten"; }
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    std::optional<Shape> cached_shape_;
};

}  // namespace fer
