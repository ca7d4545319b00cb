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

#include "fer/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "fer/error.hpp"
#include "fer/labels.hpp"

namespace fer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

Tensor<float> synthetic_image(int label, std::size_t size, std::uint64_t seed, std::size_t index,
                              double noise_std) {
    if (label < 0 || label >= static_cast<int>(kNumExpressions)) {
        throw DataError("synthetic_image: label " + std::to_string(label) + " out of range");
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    const double base = uniform(90.0, 160.0);
    const double amp = uniform(70.0, 110.0);
    const double phase = uniform(0.0, kTwoPi);
    const double period = uniform(0.14, 0.22);
    const double cx = uniform(0.38, 0.62);
    const double cy = uniform(0.38, 0.62);
    const double radius = uniform(0.18, 0.28);
    const double thickness = uniform(0.06, 0.1);
    std::normal_distribution<double> noise(0.0, noise_std);

    Tensor<float> image({size, size, 1});
    const double inv = 1.0 / static_cast<double>(size);
    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            const double u = (static_cast<double>(x) + 0.5) * inv;
            const double v = (static_cast<double>(y) + 0.5) * inv;
            const double r = std::hypot(u - cx, v - cy);
            double s = 0.0;  // pattern signal in [-1, 1]
            switch (label) {
                case 0: s = std::sin(kTwoPi * v / period + phase); break;
                case 1: s = std::sin(kTwoPi * u / period + phase); break;
                case 2: s = std::sin(kTwoPi * (u + v) / (period * std::numbers::sqrt2) + phase); break;
                case 3: s = r < radius ? 1.0 : -1.0; break;
                case 4: s = std::abs(r - radius) < thickness * 0.5 ? 1.0 : -1.0; break;
                case 5:
                    s = std::sin(kTwoPi * u / period + phase) * std::sin(kTwoPi * v / period + phase) > 0
                            ? 1.0
                            : -1.0;
                    break;
                default:
                    s = (std::abs(u - cx) < thickness * 0.6 || std::abs(v - cy) < thickness * 0.6) ? 1.0
                                                                                                  : -1.0;
                    break;
            }
            image[y * size + x] = static_cast<float>(base + 0.5 * amp * s + noise(rng));
        }
    }
    for (auto& p : image.values()) p = std::min(255.0f, std::max(0.0f, p));
    return image;
}

std::vector<ManifestEntry> write_synthetic_dataset(const std::filesystem::path& out_dir,
                                                   const SyntheticConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "images");
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < config.per_class; ++i) {
        for (int label = 0; label < static_cast<int>(kNumExpressions); ++label) {
            char name[64];
            std::snprintf(name, sizeof name, "images/%d_%05zu.pgm", label, i);
            write_pgm(out_dir / name,
                      synthetic_image(label, config.image_size, config.seed, i, config.noise_std));
            entries.push_back({name, label});
        }
    }
    std::ofstream manifest(out_dir / "manifest.csv");
    if (!manifest) throw DataError("cannot write " + (out_dir / "manifest.csv").string());
    write_manifest(manifest, entries);
    return entries;
}

ImageDataset synthetic_dataset(const SyntheticConfig& config) {
    std::vector<Tensor<float>> images;
    std::vector<int> labels;
    for (std::size_t i = 0; i < config.per_class; ++i) {
        for (int label = 0; label < static_cast<int>(kNumExpressions); ++label) {
            // Same quantization as the on-disk dataset.
            const Tensor<float> gray = decode_grayscale(
                encode_pgm(synthetic_image(label, config.image_size, config.seed, i, config.noise_std)));
            images.push_back(gray.dim(0) == kImageSide && gray.dim(1) == kImageSide
                                 ? gray
                                 : resize_bilinear(gray));
            labels.push_back(label);
        }
    }
    return ImageDataset::from_images(std::move(images), std::move(labels));
}

}  // namespace fer
