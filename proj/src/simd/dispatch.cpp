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

#include <stdexcept>

#include "fer/simd/isa.hpp"
#include "fer/simd/kernels.hpp"

namespace fer::simd {

template <>
void gemm<float>(std::size_t m, std::size_t n, std::size_t k, MatrixRef<float> a,
                 MatrixRef<float> b, float* c, std::size_t ldc, bool accumulate) {
#if defined(FER_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::gemm_f32(m, n, k, a, b, c, ldc, accumulate);
#endif
    generic::gemm_f32(m, n, k, a, b, c, ldc, accumulate);
}

template <>
void gemm<double>(std::size_t m, std::size_t n, std::size_t k, MatrixRef<double> a,
                  MatrixRef<double> b, double* c, std::size_t ldc, bool accumulate) {
#if defined(FER_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::gemm_f64(m, n, k, a, b, c, ldc, accumulate);
#endif
    generic::gemm_f64(m, n, k, a, b, c, ldc, accumulate);
}

namespace {
template <typename T>
void check_adam_spans(std::span<T> param, std::span<const T> grad, std::span<T> m,
                      std::span<T> v) {
    if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
        throw std::invalid_argument("adam_update: parameter, gradient and moment lengths differ");
    }
}
}  // namespace

template <>
void adam_update<float>(std::span<float> param, std::span<const float> grad, std::span<float> m,
                        std::span<float> v, const AdamCoefficients<float>& coef) {
    check_adam_spans(param, grad, m, v);
#if defined(FER_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::adam_update_f32(param, grad, m, v, coef);
#endif
    generic::adam_update_f32(param, grad, m, v, coef);
}

template <>
void adam_update<double>(std::span<double> param, std::span<const double> grad,
                         std::span<double> m, std::span<double> v,
                         const AdamCoefficients<double>& coef) {
    check_adam_spans(param, grad, m, v);
#if defined(FER_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::adam_update_f64(param, grad, m, v, coef);
#endif
    generic::adam_update_f64(param, grad, m, v, coef);
}

}  // namespace fer::simd
