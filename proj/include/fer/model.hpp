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
#include <memory>
#include <string>
#include <vector>

#include "fer/layers.hpp"
#include "fer/tensor.hpp"

namespace fer {

/// Structural description of a phase network:
///   [Conv(3x1,F) -> Conv(1x3,F) -> BN -> ReLU -> MaxPool] per conv filter count F,
///   Flatten,
///   [Dense(U) -> BN -> ReLU] per hidden width U,
///   Dense(classes) -> Softmax.
struct ArchConfig {
    std::size_t input_height = 48;
    std::size_t input_width = 48;
    std::size_t input_channels = 1;
    std::vector<std::size_t> conv_filters{64, 128, 256, 512};
    std::vector<std::size_t> dense_units{512, 256};
    std::size_t num_classes = 7;
    double bn_momentum = 0.99;
    double bn_epsilon = 1e-5;
    /// Pixel preprocessing, recorded so inference matches training.
    std::string pixel_scaling = "gray/255";
    /// "zero" starts the logits layer at W=0 so an untrained model predicts
    /// the uniform distribution; "he" draws it like every other layer.
    std::string classifier_init = "zero";
    std::vector<std::string> label_names{"neutral",   "anger",   "disgust", "fear",
                                         "happiness", "sadness", "surprise"};
};

/// The seven-phase 48x48 expression network.
ArchConfig fer_architecture();

/// 8x8 input, one conv phase (4 filters), one hidden dense phase (8 units),
/// 3 classes. Built from the same layer code; used for end-to-end gradient
/// checks.
ArchConfig tiny_architecture();

/// Shape after one layer of a traced forward pass.
struct LayerTrace {
    std::string name;
    std::string kind;
    Shape shape;
};

template <typename T>
class FerModel {
public:
    explicit FerModel(ArchConfig config = fer_architecture(), std::uint64_t seed = 0);

    FerModel(FerModel&&) noexcept = default;
    FerModel& operator=(FerModel&&) noexcept = default;

    [[nodiscard]] const ArchConfig& config() const { return config_; }

    /// Re-draws every parameter from seed (He init; BN reset).
    void init_params(std::uint64_t seed);

    /// Pre-softmax scores [B, classes]. Throws ShapeError naming the expected
    /// and actual input shapes; Train mode requires B >= 2.
    Tensor<T> forward_logits(Tensor<T> x, Mode mode);

    /// Class probabilities [B, classes].
    Tensor<T> forward(Tensor<T> x, Mode mode) { return softmax_rows(forward_logits(std::move(x), mode)); }

    /// Backpropagates d(loss)/d(logits) through the cached Train-mode forward
    /// and returns the gradient registry (same names, order and shapes as
    /// params()). Throws StateError when no Train-mode forward is pending.
    std::vector<ParamSlot<T>> backward(const Tensor<T>& grad_logits);

    /// Infer-mode argmax per row; ties go to the lowest class index.
    std::vector<int> predict(const Tensor<T>& x);

    /// Runs an Infer-mode forward and records every layer's output shape.
    std::vector<LayerTrace> trace(const Tensor<T>& x);

    std::vector<ParamSlot<T>> params();
    std::vector<BufferSlot<T>> buffers();

    /// Trainable parameters plus BN running statistics.
    [[nodiscard]] std::size_t parameter_count();

    /// Canonical text describing input, layers, hyperparameters, pixel
    /// scaling and label order. Checkpoints refuse to load across fingerprints.
    [[nodiscard]] std::string fingerprint() const;

    [[nodiscard]] std::size_t layer_count() const { return layers_.size(); }
    [[nodiscard]] Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
    [[nodiscard]] const std::string& layer_name(std::size_t i) const { return names_.at(i); }

private:
    void check_input(const Tensor<T>& x, Mode mode) const;
    void add(std::string name, std::unique_ptr<Layer<T>> layer);

    ArchConfig config_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<std::string> names_;
    bool pending_backward_ = false;
};

/// Row-wise argmax with ties to the lowest index.
template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores);

}  // namespace fer
