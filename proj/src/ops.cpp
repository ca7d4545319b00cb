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

#include "fer/ops.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "fer/parallel.hpp"
#include "fer/simd/kernels.hpp"

namespace fer {

namespace {

// Upper bound on im2col scratch, in elements, per chunk of samples.
constexpr std::size_t kColBudget = std::size_t{1} << 21;

struct ConvGeometry {
    std::size_t n, h, w, cin;
    std::size_t kh, kw, cout;
    std::size_t ho, wo;

    std::size_t rows_per_sample() const { return ho * wo; }
    std::size_t patch() const { return kh * kw * cin; }
    std::size_t samples_per_chunk() const {
        const std::size_t per = rows_per_sample() * patch();
        return std::clamp<std::size_t>(kColBudget / std::max<std::size_t>(per, 1), 1, n);
    }
    std::size_t chunk_count() const {
        const std::size_t spc = samples_per_chunk();
        return (n + spc - 1) / spc;
    }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& kernels) {
    if (input.rank() != 4 || kernels.rank() != 4) {
        throw ShapeError("conv2d expects input [N,H,W,Cin] and kernels [Kh,Kw,Cin,Cout], got " +
                         to_string(input.shape()) + " and " + to_string(kernels.shape()));
    }
    ConvGeometry g{input.dim(0), input.dim(1),   input.dim(2), input.dim(3), kernels.dim(0),
                   kernels.dim(1), kernels.dim(3), 0,           0};
    if (kernels.dim(2) != g.cin) {
        throw ShapeError("conv2d channel mismatch: input " + to_string(input.shape()) +
                         " vs kernels " + to_string(kernels.shape()));
    }
    if (g.kh > g.h || g.kw > g.w) {
        throw ShapeError("conv2d kernel " + to_string(kernels.shape()) +
                         " does not fit input " + to_string(input.shape()) +
                         " without padding");
    }
    g.ho = g.h - g.kh + 1;
    g.wo = g.w - g.kw + 1;
    return g;
}

// Expands samples [n0, n0+count) into rows of length kh*kw*cin, one row per
// output position, column order (a, b, c).
template <typename T>
void im2col(const ConvGeometry& g, const T* input, std::size_t n0, std::size_t count, T* col) {
    const std::size_t span = g.kw * g.cin;
    for (std::size_t n = n0; n < n0 + count; ++n) {
        for (std::size_t i = 0; i < g.ho; ++i) {
            for (std::size_t j = 0; j < g.wo; ++j) {
                for (std::size_t a = 0; a < g.kh; ++a) {
                    const T* src = input + ((n * g.h + i + a) * g.w + j) * g.cin;
                    col = std::copy(src, src + span, col);
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* col, std::size_t n0, std::size_t count, T* input) {
    const std::size_t span = g.kw * g.cin;
    for (std::size_t n = n0; n < n0 + count; ++n) {
        for (std::size_t i = 0; i < g.ho; ++i) {
            for (std::size_t j = 0; j < g.wo; ++j) {
                for (std::size_t a = 0; a < g.kh; ++a) {
                    T* dst = input + ((n * g.h + i + a) * g.w + j) * g.cin;
                    for (std::size_t e = 0; e < span; ++e) dst[e] += col[e];
                    col += span;
                }
            }
        }
    }
}

template <typename T>
std::vector<T>& scratch() {
    thread_local std::vector<T> buffer;
    return buffer;
}

}  // namespace

template <typename T>
Tensor<T> conv2d_valid(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias) {
    const ConvGeometry g = conv_geometry(input, kernels);
    if (bias.rank() != 1 || bias.dim(0) != g.cout) {
        throw ShapeError("conv2d bias " + to_string(bias.shape()) + " does not match kernels " +
                         to_string(kernels.shape()));
    }

    Tensor<T> out({g.n, g.ho, g.wo, g.cout});
    const std::size_t rows = g.rows_per_sample();
    const std::size_t patch = g.patch();
    const std::size_t spc = g.samples_per_chunk();
    const auto kmat = simd::MatrixRef<T>::row_major(kernels.data(), g.cout);

    parallel_for(g.chunk_count(), [&](std::size_t chunk) {
        const std::size_t n0 = chunk * spc;
        const std::size_t count = std::min(spc, g.n - n0);
        const std::size_t m = count * rows;
        T* dst = out.data() + n0 * rows * g.cout;
        for (std::size_t r = 0; r < m; ++r) std::copy(bias.data(), bias.data() + g.cout, dst + r * g.cout);

        auto& col = scratch<T>();
        col.resize(m * patch);
        im2col(g, input.data(), n0, count, col.data());
        simd::gemm<T>(m, g.cout, patch, simd::MatrixRef<T>::row_major(col.data(), patch), kmat, dst,
                      g.cout, true);
    });
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels,
                             const Tensor<T>& grad_out) {
    const ConvGeometry g = conv_geometry(input, kernels);
    const Shape expected{g.n, g.ho, g.wo, g.cout};
    if (grad_out.shape() != expected) {
        throw ShapeError("conv2d_backward: grad_out " + to_string(grad_out.shape()) +
                         " does not match forward output " + to_string(expected));
    }

    ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(kernels.shape()), Tensor<T>({g.cout})};

    const std::size_t total_rows = g.n * g.ho * g.wo;
    for (std::size_t r = 0; r < total_rows; ++r) {
        const T* row = grad_out.data() + r * g.cout;
        for (std::size_t o = 0; o < g.cout; ++o) grads.bias[o] += row[o];
    }

    const std::size_t rows = g.rows_per_sample();
    const std::size_t patch = g.patch();
    const std::size_t spc = g.samples_per_chunk();
    const std::size_t chunks = g.chunk_count();
    // Kernel gradients are reduced per fixed chunk and summed in chunk order,
    // so the result does not depend on the thread count.
    std::vector<std::vector<T>> partial(chunks, std::vector<T>(patch * g.cout));

    parallel_for(chunks, [&](std::size_t chunk) {
        const std::size_t n0 = chunk * spc;
        const std::size_t count = std::min(spc, g.n - n0);
        const std::size_t m = count * rows;
        const T* gout = grad_out.data() + n0 * rows * g.cout;

        auto& col = scratch<T>();
        col.resize(m * patch);
        im2col(g, input.data(), n0, count, col.data());
        simd::gemm<T>(patch, g.cout, m, simd::MatrixRef<T>::transposed(col.data(), patch),
                      simd::MatrixRef<T>::row_major(gout, g.cout), partial[chunk].data(), g.cout,
                      false);

        simd::gemm<T>(m, patch, g.cout, simd::MatrixRef<T>::row_major(gout, g.cout),
                      simd::MatrixRef<T>::transposed(kernels.data(), g.cout), col.data(), patch,
                      false);
        col2im_add(g, col.data(), n0, count, grads.input.data());
    });

    T* dk = grads.kernels.data();
    std::copy(partial[0].begin(), partial[0].end(), dk);
    for (std::size_t c = 1; c < chunks; ++c) {
        for (std::size_t e = 0; e < partial[c].size(); ++e) dk[e] += partial[c][e];
    }
    return grads;
}

template <typename T>
PoolResult<T> maxpool2d(const Tensor<T>& input) {
    if (input.rank() != 4) {
        throw ShapeError("maxpool2d expects [N,H,W,C], got " + to_string(input.shape()));
    }
    const std::size_t n = input.dim(0), h = input.dim(1), w = input.dim(2), c = input.dim(3);
    if (h < 2 || w < 2) {
        throw ShapeError("maxpool2d needs H >= 2 and W >= 2, got " + to_string(input.shape()));
    }
    if (input.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw ShapeError("maxpool2d input " + to_string(input.shape()) + " is too large to index");
    }
    const std::size_t ho = h / 2, wo = w / 2;

    PoolResult<T> result{Tensor<T>({n, ho, wo, c}), PoolIndex{input.shape(), {n, ho, wo, c}, {}}};
    result.index.argmax.resize(result.output.size());
    const T* src = input.data();
    T* dst = result.output.data();
    std::uint32_t* arg = result.index.argmax.data();

    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t i = 0; i < ho; ++i) {
            for (std::size_t j = 0; j < wo; ++j) {
                const std::size_t base = ((b * h + 2 * i) * w + 2 * j) * c;
                const std::size_t offsets[4] = {0, c, w * c, w * c + c};
                for (std::size_t ch = 0; ch < c; ++ch) {
                    std::size_t best = base + ch;
                    for (std::size_t k = 1; k < 4; ++k) {
                        const std::size_t idx = base + offsets[k] + ch;
                        if (src[idx] > src[best]) best = idx;
                    }
                    *dst++ = src[best];
                    *arg++ = static_cast<std::uint32_t>(best);
                }
            }
        }
    }
    return result;
}

template <typename T>
Tensor<T> maxpool2d_backward(const PoolIndex& index, const Tensor<T>& grad_out) {
    if (grad_out.shape() != index.output_shape || index.argmax.size() != grad_out.size()) {
        throw ShapeError("maxpool2d_backward: grad_out " + to_string(grad_out.shape()) +
                         " does not match the pooling index for output " +
                         to_string(index.output_shape));
    }
    Tensor<T> grad_in(index.input_shape);
    for (std::size_t e = 0; e < grad_out.size(); ++e) grad_in[index.argmax[e]] += grad_out[e];
    return grad_in;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul dimension mismatch: " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
    Tensor<T> out({m, p});
    simd::gemm<T>(m, p, k, simd::MatrixRef<T>::row_major(a.data(), k),
                  simd::MatrixRef<T>::row_major(b.data(), p), out.data(), p, false);
    return out;
}

#define FER_INSTANTIATE_OPS(T)                                                                  \
    template Tensor<T> conv2d_valid(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);      \
    template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
    template PoolResult<T> maxpool2d(const Tensor<T>&);                                         \
    template Tensor<T> maxpool2d_backward(const PoolIndex&, const Tensor<T>&);                  \
    template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);

FER_INSTANTIATE_OPS(float)
FER_INSTANTIATE_OPS(double)

#undef FER_INSTANTIATE_OPS

}  // namespace fer
