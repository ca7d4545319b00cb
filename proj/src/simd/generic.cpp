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

// Portable reference kernels. These define the expected results that the
// vectorised variants are tested against.

#include <algorithm>
#include <cmath>

#include "fer/simd/kernels.hpp"

namespace fer::simd::generic {

namespace {

template <typename T>
void gemm_impl(std::size_t m, std::size_t n, std::size_t k, MatrixRef<T> a, MatrixRef<T> b,
               T* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * ldc;
        if (!accumulate) std::fill(crow, crow + n, T{0});
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = a.data[static_cast<std::ptrdiff_t>(i) * a.row_stride +
                                 static_cast<std::ptrdiff_t>(p) * a.col_stride];
            const T* brow = b.data + static_cast<std::ptrdiff_t>(p) * b.row_stride;
            if (b.col_stride == 1) {
                for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
            } else {
                for (std::size_t j = 0; j < n; ++j) {
                    crow[j] += aip * brow[static_cast<std::ptrdiff_t>(j) * b.col_stride];
                }
            }
        }
    }
}

template <typename T>
void adam_impl(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
               const AdamCoefficients<T>& c) {
    const T one_minus_b1 = T{1} - c.beta1;
    const T one_minus_b2 = T{1} - c.beta2;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const T g = grad[i] + c.weight_decay * param[i];
        m[i] = c.beta1 * m[i] + one_minus_b1 * g;
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
        const T m_hat = m[i] / c.bias_correction1;
        const T v_hat = v[i] / c.bias_correction2;
        param[i] = param[i] - c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

}  // namespace

void gemm_f32(std::size_t m, std::size_t n, std::size_t k, MatrixRef<float> a, MatrixRef<float> b,
              float* c, std::size_t ldc, bool accumulate) {
    gemm_impl(m, n, k, a, b, c, ldc, accumulate);
}

void gemm_f64(std::size_t m, std::size_t n, std::size_t k, MatrixRef<double> a,
              MatrixRef<double> b, double* c, std::size_t ldc, bool accumulate) {
    gemm_impl(m, n, k, a, b, c, ldc, accumulate);
}

void adam_update_f32(std::span<float> param, std::span<const float> grad, std::span<float> m,
                     std::span<float> v, const AdamCoefficients<float>& coef) {
    adam_impl(param, grad, m, v, coef);
}

void adam_update_f64(std::span<double> param, std::span<const double> grad, std::span<double> m,
                     std::span<double> v, const AdamCoefficients<double>& coef) {
    adam_impl(param, grad, m, v, coef);
}

}  // namespace fer::simd::generic
