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

// Independent reference implementations. Plain nested loops over the
// definitions, no shared code with the library kernels.
#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "fer/tensor.hpp"

namespace fer::check {

template <typename T>
Tensor<T> random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor<T> t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(dist(rng));
    return t;
}

inline Tensor<double> reference_conv(const Tensor<double>& x, const Tensor<double>& k,
                                     const Tensor<double>& bias) {
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), cin = x.dim(3);
    const std::size_t kh = k.dim(0), kw = k.dim(1), cout = k.dim(3);
    Tensor<double> out({n, h - kh + 1, w - kw + 1, cout});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i + kh <= h; ++i)
            for (std::size_t j = 0; j + kw <= w; ++j)
                for (std::size_t o = 0; o < cout; ++o) {
                    double acc = bias[o];
                    for (std::size_t a = 0; a < kh; ++a)
                        for (std::size_t c2 = 0; c2 < kw; ++c2)
                            for (std::size_t c = 0; c < cin; ++c)
                                acc += x.at(b, i + a, j + c2, c) * k.at(a, c2, c, o);
                    out.at(b, i, j, o) = acc;
                }
    return out;
}

inline Tensor<double> reference_maxpool(const Tensor<double>& x) {
    const std::size_t n = x.dim(0), h = x.dim(1) / 2, w = x.dim(2) / 2, c = x.dim(3);
    Tensor<double> out({n, h, w, c});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                for (std::size_t ch = 0; ch < c; ++ch) {
                    double best = x.at(b, 2 * i, 2 * j, ch);
                    for (std::size_t di = 0; di < 2; ++di)
                        for (std::size_t dj = 0; dj < 2; ++dj)
                            if (x.at(b, 2 * i + di, 2 * j + dj, ch) > best) best = x.at(b, 2 * i + di, 2 * j + dj, ch);
                    out.at(b, i, j, ch) = best;
                }
    return out;
}

inline Tensor<double> reference_matmul(const Tensor<double>& a, const Tensor<double>& b) {
    Tensor<double> out({a.dim(0), b.dim(1)});
    for (std::size_t i = 0; i < a.dim(0); ++i)
        for (std::size_t j = 0; j < b.dim(1); ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < a.dim(1); ++p) acc += a.at(i, p) * b.at(p, j);
            out.at(i, j) = acc;
        }
    return out;
}

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

/// Accuracy and macro-F1 recomputed from raw label pairs, without a
/// confusion matrix: per class, count true positives, predicted and actual.
struct Recount {
    double accuracy;
    double macro_f1;
};

inline Recount recount(const std::vector<std::pair<int, int>>& pairs, int classes) {
    std::size_t equal = 0;
    for (auto [t, p] : pairs) equal += t == p;
    double f1_sum = 0.0;
    for (int k = 0; k < classes; ++k) {
        double tp = 0, predicted = 0, actual = 0;
        for (auto [t, p] : pairs) {
            tp += (t == k && p == k);
            predicted += p == k;
            actual += t == k;
        }
        const double precision = predicted > 0 ? tp / predicted : 0.0;
        const double recall = actual > 0 ? tp / actual : 0.0;
        f1_sum += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    }
    return {static_cast<double>(equal) / static_cast<double>(pairs.size()), f1_sum / classes};
}

}  // namespace fer::check
