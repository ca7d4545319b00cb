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

#include "fer/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "fer/simd/kernels.hpp"

namespace fer {

namespace {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Zero-mean Gaussian with std sqrt(2 / fan_in).
template <typename T>
void fill_he(Tensor<T>& weights, std::size_t fan_in, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (auto& w : weights.values()) w = static_cast<T>(dist(rng));
}

template <typename T>
void require_cache(bool present, std::string_view layer) {
    if (!present) {
        throw StateError(std::string(layer) +
                         " backward called without a preceding Train-mode forward");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> out = x;
    for (auto& v : out.values()) v = v > T{0} ? v : T{0};
    return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad) {
    if (input.shape() != grad.shape()) {
        throw ShapeError("relu_backward: input " + to_string(input.shape()) + " vs grad " +
                         to_string(grad.shape()));
    }
    Tensor<T> out(grad.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) out[i] = input[i] > T{0} ? grad[i] : T{0};
    return out;
}

template <typename T>
Tensor<T> flatten(Tensor<T> x) {
    const std::size_t n = x.dim(0);
    const std::size_t features = x.size() / n;
    return std::move(x).reshaped({n, features});
}

template <typename T>
Tensor<T> unflatten(Tensor<T> x, const Shape& shape) {
    if (shape_size(shape) != x.size() || shape.empty() || x.rank() == 0 || shape[0] != x.dim(0)) {
        throw ShapeError("unflatten: cannot view " + to_string(x.shape()) + " as " +
                         to_string(shape));
    }
    return std::move(x).reshaped(shape);
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
    if (logits.rank() != 2) {
        throw ShapeError("softmax_rows expects [N,K], got " + to_string(logits.shape()));
    }
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    Tensor<T> out(logits.shape());
    for (std::size_t r = 0; r < n; ++r) {
        const T* row = logits.data() + r * k;
        T* dst = out.data() + r * k;
        const T peak = *std::max_element(row, row + k);
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double e = std::exp(static_cast<double>(row[j]) - static_cast<double>(peak));
            dst[j] = static_cast<T>(e);
            total += e;
        }
        for (std::size_t j = 0; j < k; ++j) dst[j] = static_cast<T>(static_cast<double>(dst[j]) / total);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conv2DLayer

template <typename T>
Conv2DLayer<T>::Conv2DLayer(std::size_t kernel_h, std::size_t kernel_w, std::size_t in_channels,
                            std::size_t out_channels)
    : kernels_({kernel_h, kernel_w, in_channels, out_channels}),
      bias_({out_channels}),
      grad_kernels_(kernels_.shape()),
      grad_bias_(bias_.shape()) {}

template <typename T>
std::string Conv2DLayer<T>::describe() const {
    return "conv2d kh=" + std::to_string(kernels_.dim(0)) + " kw=" + std::to_string(kernels_.dim(1)) +
           " cin=" + std::to_string(kernels_.dim(2)) + " cout=" + std::to_string(kernels_.dim(3)) +
           " stride=1 padding=valid";
}

template <typename T>
Shape Conv2DLayer<T>::output_shape(const Shape& in) const {
    if (in.size() != 4 || in[3] != kernels_.dim(2) || in[1] < kernels_.dim(0) ||
        in[2] < kernels_.dim(1)) {
        throw ShapeError("conv2d layer with kernels " + to_string(kernels_.shape()) +
                         " cannot take input " + to_string(in));
    }
    return {in[0], in[1] - kernels_.dim(0) + 1, in[2] - kernels_.dim(1) + 1, kernels_.dim(3)};
}

template <typename T>
Tensor<T> Conv2DLayer<T>::forward(Tensor<T> x, Mode mode) {
    Tensor<T> out = conv2d_valid(x, kernels_, bias_);
    if (mode == Mode::train) cached_input_ = std::move(x);
    return out;
}

template <typename T>
Tensor<T> Conv2DLayer<T>::backward(const Tensor<T>& grad_out) {
    require_cache<T>(has_cache(), "conv2d");
    ConvGrads<T> g = conv2d_backward(cached_input_, kernels_, grad_out);
    grad_kernels_ = std::move(g.kernels);
    grad_bias_ = std::move(g.bias);
    cached_input_ = Tensor<T>();
    return std::move(g.input);
}

template <typename T>
void Conv2DLayer<T>::init_params(std::uint64_t seed) {
    fill_he(kernels_, kernels_.dim(0) * kernels_.dim(1) * kernels_.dim(2), seed);
    bias_.fill(T{0});
}

template <typename T>
std::vector<ParamSlot<T>> Conv2DLayer<T>::params() {
    return {{"kernels", &kernels_, &grad_kernels_}, {"bias", &bias_, &grad_bias_}};
}

// ---------------------------------------------------------------------------
// BatchNormLayer

template <typename T>
BatchNormLayer<T>::BatchNormLayer(std::size_t channels, double momentum, double epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_({channels}, T{1}),
      beta_({channels}),
      grad_gamma_({channels}),
      grad_beta_({channels}),
      running_mean_({channels}),
      running_var_({channels}, T{1}) {}

template <typename T>
std::string BatchNormLayer<T>::describe() const {
    return "batchnorm c=" + std::to_string(channels_) + " momentum=" + format_real(momentum_) +
           " eps=" + format_real(epsilon_);
}

template <typename T>
Shape BatchNormLayer<T>::output_shape(const Shape& in) const {
    if (in.size() < 2 || in.back() != channels_) {
        throw ShapeError("batchnorm over " + std::to_string(channels_) +
                         " channels cannot take input " + to_string(in));
    }
    return in;
}

template <typename T>
Tensor<T> BatchNormLayer<T>::forward(Tensor<T> x, Mode mode) {
    output_shape(x.shape());
    const std::size_t c = channels_;
    const std::size_t rows = x.size() / c;

    if (mode == Mode::infer) {
        Tensor<T> out(x.shape());
        std::vector<T> scale(c), shift(c);
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[ch]) + epsilon_);
            scale[ch] = static_cast<T>(static_cast<double>(gamma_[ch]) * inv);
            shift[ch] = static_cast<T>(static_cast<double>(beta_[ch]) -
                                       static_cast<double>(running_mean_[ch]) *
                                           static_cast<double>(gamma_[ch]) * inv);
        }
        for (std::size_t r = 0; r < rows; ++r) {
            const T* src = x.data() + r * c;
            T* dst = out.data() + r * c;
            for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = src[ch] * scale[ch] + shift[ch];
        }
        return out;
    }

    if (rows < 2) {
        throw ShapeError("batchnorm in Train mode needs at least 2 values per channel, input " +
                         to_string(x.shape()) + " has 1");
    }

    std::vector<double> mean(c, 0.0), var(c, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* src = x.data() + r * c;
        for (std::size_t ch = 0; ch < c; ++ch) mean[ch] += src[ch];
    }
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* src = x.data() + r * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double d = src[ch] - mean[ch];
            var[ch] += d * d;
        }
    }

    cached_inv_std_.assign(c, T{0});
    std::vector<T> mean_t(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double biased = var[ch] / static_cast<double>(rows);
        const double unbiased = var[ch] / static_cast<double>(rows - 1);
        cached_inv_std_[ch] = static_cast<T>(1.0 / std::sqrt(biased + epsilon_));
        mean_t[ch] = static_cast<T>(mean[ch]);
        running_mean_[ch] = static_cast<T>(momentum_ * running_mean_[ch] + (1.0 - momentum_) * mean[ch]);
        running_var_[ch] = static_cast<T>(momentum_ * running_var_[ch] + (1.0 - momentum_) * unbiased);
    }

    Tensor<T> out(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        T* xr = x.data() + r * c;
        T* dst = out.data() + r * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            xr[ch] = (xr[ch] - mean_t[ch]) * cached_inv_std_[ch];
            dst[ch] = gamma_[ch] * xr[ch] + beta_[ch];
        }
    }
    cached_normalized_ = std::move(x);
    return out;
}

template <typename T>
Tensor<T> BatchNormLayer<T>::backward(const Tensor<T>& grad_out) {
    require_cache<T>(!cached_normalized_.empty(), "batchnorm");
    if (grad_out.shape() != cached_normalized_.shape()) {
        throw ShapeError("batchnorm backward: grad_out " + to_string(grad_out.shape()) +
                         " does not match forward shape " + to_string(cached_normalized_.shape()));
    }
    const std::size_t c = channels_;
    const std::size_t rows = grad_out.size() / c;
    const Tensor<T>& xhat = cached_normalized_;

    std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* dy = grad_out.data() + r * c;
        const T* xh = xhat.data() + r * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            sum_dy[ch] += dy[ch];
            sum_dy_xhat[ch] += static_cast<double>(dy[ch]) * xh[ch];
        }
    }

    // dx = gamma * inv_std / M * (M * dy - sum(dy) - xhat * sum(dy * xhat))
    std::vector<T> scale(c), mean_dy(c), mean_dy_xhat(c);
    const double m = static_cast<double>(rows);
    for (std::size_t ch = 0; ch < c; ++ch) {
        grad_beta_[ch] = static_cast<T>(sum_dy[ch]);
        grad_gamma_[ch] = static_cast<T>(sum_dy_xhat[ch]);
        scale[ch] = gamma_[ch] * cached_inv_std_[ch];
        mean_dy[ch] = static_cast<T>(sum_dy[ch] / m);
        mean_dy_xhat[ch] = static_cast<T>(sum_dy_xhat[ch] / m);
    }

    Tensor<T> grad_in(grad_out.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const T* dy = grad_out.data() + r * c;
        const T* xh = xhat.data() + r * c;
        T* dx = grad_in.data() + r * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            dx[ch] = scale[ch] * (dy[ch] - mean_dy[ch] - xh[ch] * mean_dy_xhat[ch]);
        }
    }
    cached_normalized_ = Tensor<T>();
    cached_inv_std_.clear();
    return grad_in;
}

template <typename T>
void BatchNormLayer<T>::init_params(std::uint64_t) {
    gamma_.fill(T{1});
    beta_.fill(T{0});
    running_mean_.fill(T{0});
    running_var_.fill(T{1});
}

template <typename T>
std::vector<ParamSlot<T>> BatchNormLayer<T>::params() {
    return {{"gamma", &gamma_, &grad_gamma_}, {"beta", &beta_, &grad_beta_}};
}

template <typename T>
std::vector<BufferSlot<T>> BatchNormLayer<T>::buffers() {
    return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
}

// ---------------------------------------------------------------------------
// DenseLayer

template <typename T>
DenseLayer<T>::DenseLayer(std::size_t in_features, std::size_t out_features)
    : weights_({in_features, out_features}),
      bias_({out_features}),
      grad_weights_(weights_.shape()),
      grad_bias_(bias_.shape()) {}

template <typename T>
std::string DenseLayer<T>::describe() const {
    return "dense in=" + std::to_string(weights_.dim(0)) + " out=" + std::to_string(weights_.dim(1));
}

template <typename T>
Shape DenseLayer<T>::output_shape(const Shape& in) const {
    if (in.size() != 2 || in[1] != weights_.dim(0)) {
        throw ShapeError("dense layer with weights " + to_string(weights_.shape()) +
                         " cannot take input " + to_string(in));
    }
    return {in[0], weights_.dim(1)};
}

template <typename T>
Tensor<T> DenseLayer<T>::forward(Tensor<T> x, Mode mode) {
    const Shape out_shape = output_shape(x.shape());
    const std::size_t n = out_shape[0], in = weights_.dim(0), out = weights_.dim(1);
    Tensor<T> y(out_shape);
    for (std::size_t r = 0; r < n; ++r) std::copy(bias_.data(), bias_.data() + out, y.data() + r * out);
    simd::gemm<T>(n, out, in, simd::MatrixRef<T>::row_major(x.data(), in),
                  simd::MatrixRef<T>::row_major(weights_.data(), out), y.data(), out, true);
    if (mode == Mode::train) cached_input_ = std::move(x);
    return y;
}

template <typename T>
Tensor<T> DenseLayer<T>::backward(const Tensor<T>& grad_out) {
    require_cache<T>(!cached_input_.empty(), "dense");
    const std::size_t n = cached_input_.dim(0), in = weights_.dim(0), out = weights_.dim(1);
    if (grad_out.shape() != Shape{n, out}) {
        throw ShapeError("dense backward: grad_out " + to_string(grad_out.shape()) +
                         " does not match forward output " + to_string(Shape{n, out}));
    }
    simd::gemm<T>(in, out, n, simd::MatrixRef<T>::transposed(cached_input_.data(), in),
                  simd::MatrixRef<T>::row_major(grad_out.data(), out), grad_weights_.data(), out,
                  false);
    grad_bias_.fill(T{0});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out; ++o) grad_bias_[o] += grad_out[r * out + o];
    }
    Tensor<T> grad_in({n, in});
    simd::gemm<T>(n, in, out, simd::MatrixRef<T>::row_major(grad_out.data(), out),
                  simd::MatrixRef<T>::transposed(weights_.data(), out), grad_in.data(), in, false);
    cached_input_ = Tensor<T>();
    return grad_in;
}

template <typename T>
void DenseLayer<T>::init_params(std::uint64_t seed) {
    fill_he(weights_, weights_.dim(0), seed);
    bias_.fill(T{0});
}

template <typename T>
std::vector<ParamSlot<T>> DenseLayer<T>::params() {
    return {{"weights", &weights_, &grad_weights_}, {"bias", &bias_, &grad_bias_}};
}

// ---------------------------------------------------------------------------
// ReLU, MaxPool, Flatten

template <typename T>
Tensor<T> ReLULayer<T>::forward(Tensor<T> x, Mode mode) {
    if (mode == Mode::train) {
        cached_shape_ = x.shape();
        mask_.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            mask_[i] = x[i] > T{0};
            if (!mask_[i]) x[i] = T{0};
        }
        return x;
    }
    for (auto& v : x.values()) v = v > T{0} ? v : T{0};
    return x;
}

template <typename T>
Tensor<T> ReLULayer<T>::backward(const Tensor<T>& grad_out) {
    require_cache<T>(!cached_shape_.empty(), "relu");
    if (grad_out.shape() != cached_shape_) {
        throw ShapeError("relu backward: grad_out " + to_string(grad_out.shape()) +
                         " does not match forward shape " + to_string(cached_shape_));
    }
    Tensor<T> grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
        if (!mask_[i]) grad_in[i] = T{0};
    }
    cached_shape_.clear();
    mask_.clear();
    return grad_in;
}

template <typename T>
Shape MaxPoolLayer<T>::output_shape(const Shape& in) const {
    if (in.size() != 4 || in[1] < 2 || in[2] < 2) {
        throw ShapeError("maxpool2d cannot take input " + to_string(in));
    }
    return {in[0], in[1] / 2, in[2] / 2, in[3]};
}

template <typename T>
Tensor<T> MaxPoolLayer<T>::forward(Tensor<T> x, Mode mode) {
    PoolResult<T> r = maxpool2d(x);
    if (mode == Mode::train) index_ = std::move(r.index);
    return std::move(r.output);
}

template <typename T>
Tensor<T> MaxPoolLayer<T>::backward(const Tensor<T>& grad_out) {
    require_cache<T>(index_.has_value(), "maxpool2d");
    Tensor<T> grad_in = maxpool2d_backward(*index_, grad_out);
    index_.reset();
    return grad_in;
}

template <typename T>
Shape FlattenLayer<T>::output_shape(const Shape& in) const {
    if (in.size() < 2) throw ShapeError("flatten cannot take input " + to_string(in));
    return {in[0], shape_size(in) / in[0]};
}

template <typename T>
Tensor<T> FlattenLayer<T>::forward(Tensor<T> x, Mode mode) {
    if (mode == Mode::train) cached_shape_ = x.shape();
    return flatten(std::move(x));
}

template <typename T>
Tensor<T> FlattenLayer<T>::backward(const Tensor<T>& grad_out) {
    require_cache<T>(cached_shape_.has_value(), "flatten");
    Tensor<T> grad_in = unflatten(grad_out, *cached_shape_);
    cached_shape_.reset();
    return grad_in;
}

#define FER_INSTANTIATE_LAYERS(T)                                              \
    template Tensor<T> relu(const Tensor<T>&);                                 \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);      \
    template Tensor<T> flatten(Tensor<T>);                                     \
    template Tensor<T> unflatten(Tensor<T>, const Shape&);                     \
    template Tensor<T> softmax_rows(const Tensor<T>&);                         \
    template class Conv2DLayer<T>;                                             \
    template class BatchNormLayer<T>;                                          \
    template class DenseLayer<T>;                                              \
    template class ReLULayer<T>;                                               \
    template class MaxPoolLayer<T>;                                            \
    template class FlattenLayer<T>;

FER_INSTANTIATE_LAYERS(float)
FER_INSTANTIATE_LAYERS(double)

#undef FER_INSTANTIATE_LAYERS

}  // namespace fer
