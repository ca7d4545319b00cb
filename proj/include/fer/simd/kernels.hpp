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

#include <cstddef>
#include <span>

namespace fer::simd {

/// Read-only strided view of a row/column-addressed matrix. Element (i, j) is
/// data[i * row_stride + j * col_stride], so a transpose is a stride swap.
template <typename T>
struct MatrixRef {
    const T* data;
    std::ptrdiff_t row_stride;
    std::ptrdiff_t col_stride;

    static MatrixRef row_major(const T* data, std::size_t cols) {
        return {data, static_cast<std::ptrdiff_t>(cols), 1};
    }
    static MatrixRef transposed(const T* data, std::size_t cols) {
        return {data, 1, static_cast<std::ptrdiff_t>(cols)};
    }
};

/// C[m x n] (+)= A[m x k] * B[k x n], with C row-major and leading dimension ldc.
/// When accumulate is false C is overwritten.
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixRef<T> a, MatrixRef<T> b, T* c,
          std::size_t ldc, bool accumulate);

/// Per-step constants of an Adam update; the bias corrections are 1 - beta^t.
template <typename T>
struct AdamCoefficients {
    T lr;
    T beta1;
    T beta2;
    T epsilon;
    T weight_decay;
    T bias_correction1;
    T bias_correction2;
};

/// One Adam step over a flat parameter block, with L2 decay folded into the
/// gradient. All four spans must have the same length.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 const AdamCoefficients<T>& coef);

// Per-ISA entry points. The dispatching functions above forward to one of
// these; tests call them directly to check the variants agree.
namespace generic {
void gemm_f32(std::size_t m, std::size_t n, std::size_t k, MatrixRef<float> a, MatrixRef<float> b,
              float* c, std::size_t ldc, bool accumulate);
void gemm_f64(std::size_t m, std::size_t n, std::size_t k, MatrixRef<double> a,
              MatrixRef<double> b, double* c, std::size_t ldc, bool accumulate);
void adam_update_f32(std::span<float> param, std::span<const float> grad, std::span<float> m,
                     std::span<float> v, const AdamCoefficients<float>& coef);
void adam_update_f64(std::span<double> param, std::span<const double> grad, std::span<double> m,
                     std::span<double> v, const AdamCoefficients<double>& coef);
}  // namespace generic

#if defined(FER_HAVE_AVX2)
namespace avx2 {
void gemm_f32(std::size_t m, std::size_t n, std::size_t k, MatrixRef<float> a, MatrixRef<float> b,
              float* c, std::size_t ldc, bool accumulate);
void gemm_f64(std::size_t m, std::size_t n, std::size_t k, MatrixRef<double> a,
              MatrixRef<double> b, double* c, std::size_t ldc, bool accumulate);
void adam_update_f32(std::span<float> param, std::span<const float> grad, std::span<float> m,
                     std::span<float> v, const AdamCoefficients<float>& coef);
void adam_update_f64(std::span<double> param, std::span<const double> grad, std::span<double> m,
                     std::span<double> v, const AdamCoefficients<double>& coef);
}  // namespace avx2
#endif

}  // namespace fer::simd
