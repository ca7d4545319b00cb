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

// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after isa_supported(Isa::avx2) returned true.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fer/simd/kernels.hpp"

namespace fer::simd::avx2 {

namespace {

struct F32Ops {
    using T = float;
    using V = __m256;
    static constexpr std::size_t lanes = 8;
    static V zero() { return _mm256_setzero_ps(); }
    static V set1(T x) { return _mm256_set1_ps(x); }
    static V load(const T* p) { return _mm256_loadu_ps(p); }
    static void store(T* p, V v) { _mm256_storeu_ps(p, v); }
    static V broadcast(const T* p) { return _mm256_broadcast_ss(p); }
    static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
    static V add(V a, V b) { return _mm256_add_ps(a, b); }
    static V sub(V a, V b) { return _mm256_sub_ps(a, b); }
    static V mul(V a, V b) { return _mm256_mul_ps(a, b); }
    static V div(V a, V b) { return _mm256_div_ps(a, b); }
    static V sqrt(V a) { return _mm256_sqrt_ps(a); }
};

struct F64Ops {
    using T = double;
    using V = __m256d;
    static constexpr std::size_t lanes = 4;
    static V zero() { return _mm256_setzero_pd(); }
    static V set1(T x) { return _mm256_set1_pd(x); }
    static V load(const T* p) { return _mm256_loadu_pd(p); }
    static void store(T* p, V v) { _mm256_storeu_pd(p, v); }
    static V broadcast(const T* p) { return _mm256_broadcast_sd(p); }
    static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
    static V add(V a, V b) { return _mm256_add_pd(a, b); }
    static V sub(V a, V b) { return _mm256_sub_pd(a, b); }
    static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
    static V div(V a, V b) { return _mm256_div_pd(a, b); }
    static V sqrt(V a) { return _mm256_sqrt_pd(a); }
};

// Register tile is kMr rows by two vectors; blocking sizes keep a packed A
// block in L2 and a B panel in L1.
constexpr std::size_t kMr = 6;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;
constexpr std::size_t kNc = 2048;

template <typename T>
inline T element(const MatrixRef<T>& m, std::size_t i, std::size_t j) {
    return m.data[static_cast<std::ptrdiff_t>(i) * m.row_stride +
                  static_cast<std::ptrdiff_t>(j) * m.col_stride];
}

// Packs rows [i0, i0+mc) x cols [p0, p0+kc) of A into kMr-row panels,
// column-interleaved, zero-padding the last panel.
template <typename T>
void pack_a(const MatrixRef<T>& a, std::size_t i0, std::size_t mc, std::size_t p0, std::size_t kc,
            T* out) {
    for (std::size_t ir = 0; ir < mc; ir += kMr) {
        const std::size_t rows = std::min(kMr, mc - ir);
        for (std::size_t p = 0; p < kc; ++p) {
            std::size_t r = 0;
            for (; r < rows; ++r) *out++ = element(a, i0 + ir + r, p0 + p);
            for (; r < kMr; ++r) *out++ = T{0};
        }
    }
}

// Packs rows [p0, p0+kc) x cols [j0, j0+nc) of B into nr-column panels.
template <typename T, std::size_t Nr>
void pack_b(const MatrixRef<T>& b, std::size_t p0, std::size_t kc, std::size_t j0, std::size_t nc,
            T* out) {
    for (std::size_t jr = 0; jr < nc; jr += Nr) {
        const std::size_t cols = std::min(Nr, nc - jr);
        for (std::size_t p = 0; p < kc; ++p) {
            const T* src = b.data + static_cast<std::ptrdiff_t>(p0 + p) * b.row_stride +
                           static_cast<std::ptrdiff_t>(j0 + jr) * b.col_stride;
            std::size_t j = 0;
            if (b.col_stride == 1) {
                for (; j < cols; ++j) out[j] = src[j];
            } else {
                for (; j < cols; ++j) out[j] = src[static_cast<std::ptrdiff_t>(j) * b.col_stride];
            }
            for (; j < Nr; ++j) out[j] = T{0};
            out += Nr;
        }
    }
}

template <typename Ops>
void micro_kernel(std::size_t kc, const typename Ops::T* ap, const typename Ops::T* bp,
                  typename Ops::T* c, std::size_t ldc, bool accumulate) {
    using V = typename Ops::V;
    constexpr std::size_t L = Ops::lanes;
    V acc[kMr][2];
#pragma GCC unroll 6
    for (std::size_t r = 0; r < kMr; ++r) acc[r][0] = acc[r][1] = Ops::zero();

    for (std::size_t p = 0; p < kc; ++p) {
        const V b0 = Ops::load(bp);
        const V b1 = Ops::load(bp + L);
#pragma GCC unroll 6
        for (std::size_t r = 0; r < kMr; ++r) {
            const V av = Ops::broadcast(ap + r);
            acc[r][0] = Ops::fmadd(av, b0, acc[r][0]);
            acc[r][1] = Ops::fmadd(av, b1, acc[r][1]);
        }
        ap += kMr;
        bp += 2 * L;
    }

#pragma GCC unroll 6
    for (std::size_t r = 0; r < kMr; ++r) {
        auto* row = c + r * ldc;
        if (accumulate) {
            Ops::store(row, Ops::add(Ops::load(row), acc[r][0]));
            Ops::store(row + L, Ops::add(Ops::load(row + L), acc[r][1]));
        } else {
            Ops::store(row, acc[r][0]);
            Ops::store(row + L, acc[r][1]);
        }
    }
}

template <typename Ops>
void gemm_impl(std::size_t m, std::size_t n, std::size_t k, MatrixRef<typename Ops::T> a,
               MatrixRef<typename Ops::T> b, typename Ops::T* c, std::size_t ldc,
               bool accumulate) {
    using T = typename Ops::T;
    constexpr std::size_t kNr = 2 * Ops::lanes;
    if (m == 0 || n == 0) return;
    if (k == 0) {
        if (!accumulate) {
            for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, T{0});
        }
        return;
    }

    thread_local std::vector<T> packed_a;
    thread_local std::vector<T> packed_b;
    packed_a.resize(kMc * kKc);
    packed_b.resize(kKc * kNc);
    alignas(32) T edge[kMr * kNr];

    for (std::size_t jc = 0; jc < n; jc += kNc) {
        const std::size_t nc = std::min(kNc, n - jc);
        for (std::size_t pc = 0; pc < k; pc += kKc) {
            const std::size_t kc = std::min(kKc, k - pc);
            pack_b<T, kNr>(b, pc, kc, jc, nc, packed_b.data());
            const bool acc = accumulate || pc > 0;
            for (std::size_t ic = 0; ic < m; ic += kMc) {
                const std::size_t mc = std::min(kMc, m - ic);
                pack_a(a, ic, mc, pc, kc, packed_a.data());
                for (std::size_t jr = 0; jr < nc; jr += kNr) {
                    const std::size_t nr = std::min(kNr, nc - jr);
                    const T* bp = packed_b.data() + jr * kc;
                    for (std::size_t ir = 0; ir < mc; ir += kMr) {
                        const std::size_t mr = std::min(kMr, mc - ir);
                        const T* ap = packed_a.data() + ir * kc;
                        T* ctile = c + (ic + ir) * ldc + jc + jr;
                        if (mr == kMr && nr == kNr) {
                            micro_kernel<Ops>(kc, ap, bp, ctile, ldc, acc);
                            continue;
                        }
                        micro_kernel<Ops>(kc, ap, bp, edge, kNr, false);
                        for (std::size_t r = 0; r < mr; ++r) {
                            T* row = ctile + r * ldc;
                            const T* src = edge + r * kNr;
                            if (acc) {
                                for (std::size_t j = 0; j < nr; ++j) row[j] += src[j];
                            } else {
                                for (std::size_t j = 0; j < nr; ++j) row[j] = src[j];
                            }
                        }
                    }
                }
            }
        }
    }
}

template <typename Ops>
void adam_impl(std::span<typename Ops::T> param, std::span<const typename Ops::T> grad,
               std::span<typename Ops::T> m, std::span<typename Ops::T> v,
               const AdamCoefficients<typename Ops::T>& c) {
    using T = typename Ops::T;
    using V = typename Ops::V;
    constexpr std::size_t L = Ops::lanes;
    const T one_minus_b1 = T{1} - c.beta1;
    const T one_minus_b2 = T{1} - c.beta2;
    const V lr = Ops::set1(c.lr), b1 = Ops::set1(c.beta1), b2 = Ops::set1(c.beta2);
    const V omb1 = Ops::set1(one_minus_b1), omb2 = Ops::set1(one_minus_b2);
    const V eps = Ops::set1(c.epsilon), wd = Ops::set1(c.weight_decay);
    const V bc1 = Ops::set1(c.bias_correction1), bc2 = Ops::set1(c.bias_correction2);

    const std::size_t n = param.size();
    std::size_t i = 0;
    for (; i + L <= n; i += L) {
        const V p = Ops::load(param.data() + i);
        const V g = Ops::add(Ops::load(grad.data() + i), Ops::mul(wd, p));
        const V mi = Ops::add(Ops::mul(b1, Ops::load(m.data() + i)), Ops::mul(omb1, g));
        const V vi = Ops::add(Ops::mul(b2, Ops::load(v.data() + i)), Ops::mul(omb2, Ops::mul(g, g)));
        Ops::store(m.data() + i, mi);
        Ops::store(v.data() + i, vi);
        const V m_hat = Ops::div(mi, bc1);
        const V v_hat = Ops::div(vi, bc2);
        const V step = Ops::div(Ops::mul(lr, m_hat), Ops::add(Ops::sqrt(v_hat), eps));
        Ops::store(param.data() + i, Ops::sub(p, step));
    }
    for (; i < n; ++i) {
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
    gemm_impl<F32Ops>(m, n, k, a, b, c, ldc, accumulate);
}

void gemm_f64(std::size_t m, std::size_t n, std::size_t k, MatrixRef<double> a,
              MatrixRef<double> b, double* c, std::size_t ldc, bool accumulate) {
    gemm_impl<F64Ops>(m, n, k, a, b, c, ldc, accumulate);
}

void adam_update_f32(std::span<float> param, std::span<const float> grad, std::span<float> m,
                     std::span<float> v, const AdamCoefficients<float>& coef) {
    adam_impl<F32Ops>(param, grad, m, v, coef);
}

void adam_update_f64(std::span<double> param, std::span<const double> grad, std::span<double> m,
                     std::span<double> v, const AdamCoefficients<double>& coef) {
    adam_impl<F64Ops>(param, grad, m, v, coef);
}

}  // namespace fer::simd::avx2
