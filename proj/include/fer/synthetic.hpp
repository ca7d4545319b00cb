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
#include <filesystem>
#include <vector>

#include "fer/data.hpp"
#include "fer/tensor.hpp"

namespace fer {

/// Seeded 7-class stand-in for face crops: each class is a distinct geometric
/// pattern (horizontal, vertical or diagonal stripes, disk, ring,
/// checkerboard, cross) with random phase, position, contrast and additive
/// Gaussian noise.
struct SyntheticConfig {
    std::size_t per_class = 10;
    std::size_t image_size = 64;
    std::uint64_t seed = 0;
    double noise_std = 12.0;  ///< in gray levels
};

/// One [size,size,1] image with gray levels in [0,255]. Deterministic in
/// (seed, label, index).
Tensor<float> synthetic_image(int label, std::size_t size, std::uint64_t seed, std::size_t index,
                              double noise_std = 12.0);

/// Writes images/<class>_<index>.pgm plus manifest.csv under out_dir and
/// returns the manifest entries (paths relative to out_dir).
std::vector<ManifestEntry> write_synthetic_dataset(const std::filesystem::path& out_dir,
                                                   const SyntheticConfig& config);

/// The same samples, resized to 48x48 and kept in memory.
ImageDataset synthetic_dataset(const SyntheticConfig& config);

}  // namespace fer
