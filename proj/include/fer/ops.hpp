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
#include <vector>

#include "fer/tensor.hpp"

namespace fer {

/// Stride-1 valid (unpadded) 2-D convolution over NHWC input.
///
/// input is [N,H,W,Cin], kernels [Kh,Kw,Cin,Cout], bias [Cout]; the result is
/// [N, H-Kh+1, W-Kw+1, Cout] with
///   out[n,i,j,o] = bias[o] + sum_{a,b,c} input[n,i+a,j+b,c] * kernels[a,b,c,o].
/// Throws ShapeError naming both shapes when they are incompatible or the
/// kernel does not fit inside the input.
template <typename T>
Tensor<T> conv2d_valid(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias);

template <typename T>
struct ConvGrads {
    Tensor<T> input;
    Tensor<T> kernels;
    Tensor<T> bias;
};

/// Gradients of sum(grad_out * conv2d_valid(input, kernels, bias)) with
/// respect to input, kernels and bias. The bias value itself is not needed.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels,
                             const Tensor<T>& grad_out);

/// Argmax bookkeeping produced by maxpool2d: for every output element, the
/// flat input index that supplied its maximum.
struct PoolIndex {
    Shape input_shape;
    Shape output_shape;
    std::vector<std::uint32_t> argmax;
};

template <typename T>
struct PoolResult {
    Tensor<T> output;
    PoolIndex index;
};

/// 2x2 max pooling with step 2 over NHWC input; a trailing odd row or column
/// is dropped. Ties go to the first element in row-major window order.
template <typename T>
PoolResult<T> maxpool2d(const Tensor<T>& input);

/// Routes each output gradient to the input position recorded in index.
/// Throws ShapeError if grad_out does not match the recorded output shape.
template <typename T>
Tensor<T> maxpool2d_backward(const PoolIndex& index, const Tensor<T>& grad_out);

/// [M,K] x [K,P] matrix product.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace fer
