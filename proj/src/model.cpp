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

#include "fer/model.hpp"

#include <cstdio>
#include <stdexcept>

namespace fer {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

ArchConfig fer_architecture() { return ArchConfig{}; }

ArchConfig tiny_architecture() {
    ArchConfig cfg;
    cfg.input_height = 8;
    cfg.input_width = 8;
    cfg.conv_filters = {4};
    cfg.dense_units = {8};
    cfg.num_classes = 3;
    cfg.label_names = {"neutral", "anger", "disgust"};
    cfg.classifier_init = "he";
    return cfg;
}

template <typename T>
FerModel<T>::FerModel(ArchConfig config, std::uint64_t seed) : config_(std::move(config)) {
    if (config_.classifier_init != "zero" && config_.classifier_init != "he") {
        throw std::invalid_argument("classifier_init must be \"zero\" or \"he\", got \"" +
                                    config_.classifier_init + "\"");
    }
    if (config_.label_names.size() != config_.num_classes) {
        throw std::invalid_argument("label_names must list one name per class");
    }
    std::size_t channels = config_.input_channels;
    std::size_t phase = 1;
    for (std::size_t filters : config_.conv_filters) {
        const std::string p = "phase" + std::to_string(phase++) + ".";
        add(p + "conv_a", std::make_unique<Conv2DLayer<T>>(3, 1, channels, filters));
        add(p + "conv_b", std::make_unique<Conv2DLayer<T>>(1, 3, filters, filters));
        add(p + "bn", std::make_unique<BatchNormLayer<T>>(filters, config_.bn_momentum, config_.bn_epsilon));
        add(p + "relu", std::make_unique<ReLULayer<T>>());
        add(p + "pool", std::make_unique<MaxPoolLayer<T>>());
        channels = filters;
    }
    add("flatten", std::make_unique<FlattenLayer<T>>());

    // Feature width after the conv stack; throws if the input is too small.
    Shape shape{1, config_.input_height, config_.input_width, config_.input_channels};
    for (const auto& layer : layers_) shape = layer->output_shape(shape);
    std::size_t features = shape[1];

    for (std::size_t units : config_.dense_units) {
        const std::string p = "phase" + std::to_string(phase++) + ".";
        add(p + "dense", std::make_unique<DenseLayer<T>>(features, units));
        add(p + "bn", std::make_unique<BatchNormLayer<T>>(units, config_.bn_momentum, config_.bn_epsilon));
        add(p + "relu", std::make_unique<ReLULayer<T>>());
        features = units;
    }
    add("phase" + std::to_string(phase) + ".dense",
        std::make_unique<DenseLayer<T>>(features, config_.num_classes));

    init_params(seed);
}

template <typename T>
void FerModel<T>::add(std::string name, std::unique_ptr<Layer<T>> layer) {
    names_.push_back(std::move(name));
    layers_.push_back(std::move(layer));
}

template <typename T>
void FerModel<T>::init_params(std::uint64_t seed) {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->init_params(splitmix64(seed ^ splitmix64(i)));
    if (config_.classifier_init == "zero") {
        static_cast<DenseLayer<T>&>(*layers_.back()).weights().fill(T{0});
    }
}

template <typename T>
void FerModel<T>::check_input(const Tensor<T>& x, Mode mode) const {
    const Shape expected{x.rank() == 4 ? x.dim(0) : 0, config_.input_height, config_.input_width,
                         config_.input_channels};
    if (x.shape() != expected) {
        throw ShapeError("model input must be [B," + std::to_string(config_.input_height) + "," +
                         std::to_string(config_.input_width) + "," +
                         std::to_string(config_.input_channels) + "], got " + to_string(x.shape()));
    }
    if (mode == Mode::train && x.dim(0) < 2) {
        throw ShapeError("Train-mode forward needs a batch of at least 2, got " + to_string(x.shape()));
    }
}

template <typename T>
Tensor<T> FerModel<T>::forward_logits(Tensor<T> x, Mode mode) {
    check_input(x, mode);
    if (mode == Mode::train) pending_backward_ = false;
    for (auto& layer : layers_) x = layer->forward(std::move(x), mode);
    if (mode == Mode::train) pending_backward_ = true;
    return x;
}

template <typename T>
std::vector<ParamSlot<T>> FerModel<T>::backward(const Tensor<T>& grad_logits) {
    if (!pending_backward_) {
        throw StateError("model backward called without a preceding Train-mode forward");
    }
    pending_backward_ = false;
    Tensor<T> grad = grad_logits;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) grad = (*it)->backward(grad);
    return params();
}

template <typename T>
std::vector<int> FerModel<T>::predict(const Tensor<T>& x) {
    return argmax_rows(forward_logits(x, Mode::infer));
}

template <typename T>
std::vector<LayerTrace> FerModel<T>::trace(const Tensor<T>& input) {
    std::vector<LayerTrace> out;
    check_input(input, Mode::infer);
    Tensor<T> x = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        x = layers_[i]->forward(std::move(x), Mode::infer);
        out.push_back({names_[i], std::string(layers_[i]->kind()), x.shape()});
    }
    return out;
}

template <typename T>
std::vector<ParamSlot<T>> FerModel<T>::params() {
    std::vector<ParamSlot<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        for (auto& slot : layers_[i]->params()) {
            slot.name = names_[i] + "." + slot.name;
            out.push_back(std::move(slot));
        }
    }
    return out;
}

template <typename T>
std::vector<BufferSlot<T>> FerModel<T>::buffers() {
    std::vector<BufferSlot<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        for (auto& slot : layers_[i]->buffers()) {
            slot.name = names_[i] + "." + slot.name;
            out.push_back(std::move(slot));
        }
    }
    return out;
}

template <typename T>
std::size_t FerModel<T>::parameter_count() {
    std::size_t total = 0;
    for (const auto& p : params()) total += p.value->size();
    for (const auto& b : buffers()) total += b.value->size();
    return total;
}

template <typename T>
std::string FerModel<T>::fingerprint() const {
    std::string fp = "fercnn-arch 1\n";
    fp += "input " + std::to_string(config_.input_height) + "x" + std::to_string(config_.input_width) +
          "x" + std::to_string(config_.input_channels) + "\n";
    for (std::size_t i = 0; i < layers_.size(); ++i) fp += names_[i] + " " + layers_[i]->describe() + "\n";
    fp += "output softmax classes=" + std::to_string(config_.num_classes) + "\n";
    fp += "pixels " + config_.pixel_scaling + "\n";
    fp += "classifier_init " + config_.classifier_init + "\n";
    fp += "labels";
    for (std::size_t i = 0; i < config_.label_names.size(); ++i) fp += (i ? "," : " ") + config_.label_names[i];
    fp += "\n";
    return fp;
}

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores) {
    if (scores.rank() != 2) throw ShapeError("argmax_rows expects [N,K], got " + to_string(scores.shape()));
    const std::size_t n = scores.dim(0), k = scores.dim(1);
    std::vector<int> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        const T* row = scores.data() + r * k;
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (row[j] > row[best]) best = j;
        }
        out[r] = static_cast<int>(best);
    }
    return out;
}

template class FerModel<float>;
template class FerModel<double>;
template std::vector<int> argmax_rows(const Tensor<float>&);
template std::vector<int> argmax_rows(const Tensor<double>&);

}  // namespace fer
