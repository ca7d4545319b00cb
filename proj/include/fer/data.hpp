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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fer/tensor.hpp"

namespace fer {

inline constexpr std::size_t kImageSide = 48;

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
    std::string image_path;
    int label;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    /// Rows whose label fell outside [0,6], e.g. -1 markers for unusable frames.
    std::size_t skipped = 0;
};

/// Reads a "path,label" CSV. Rows with out-of-range labels are skipped and
/// counted; malformed rows raise DataError naming the line number.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::istream& in, std::string_view source = "<stream>");
void write_manifest(std::ostream& out, std::span<const ManifestEntry> entries);

// ---------------------------------------------------------------------------
// Images

/// Decodes an image into a [H,W,1] tensor of gray levels in [0,255].
///
/// Binary PGM (P5) is always supported; binary PPM (P6) and, when built with
/// libpng/libjpeg, PNG and JPEG are accepted too. Colour sources are reduced
/// with 0.299 R + 0.587 G + 0.114 B. Throws DataError on unsupported or
/// corrupt input.
Tensor<float> decode_grayscale(std::span<const std::uint8_t> bytes);
Tensor<float> load_grayscale(const std::filesystem::path& path);

/// 8-bit binary PGM encoding of a [H,W,1] tensor; values are rounded and
/// clamped to [0,255].
std::vector<std::uint8_t> encode_pgm(const Tensor<float>& image);
void write_pgm(const std::filesystem::path& path, const Tensor<float>& image);

/// Bilinear resize of a [H,W,1] image using half-pixel centres:
/// source coordinate = (dst + 0.5) * in / out - 0.5, clamped to the image.
Tensor<float> resize_bilinear(const Tensor<float>& image, std::size_t out_height = kImageSide,
                              std::size_t out_width = kImageSide);

// ---------------------------------------------------------------------------
// Splitting and batching

struct SplitConfig {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct DataSplit {
    std::vector<ManifestEntry> train;
    std::vector<ManifestEntry> validation;
};

/// Seeded shuffle, then the first floor(train_fraction * n) entries train and
/// the rest validate. Throws DataError for fewer than 2 entries and
/// std::invalid_argument for a fraction outside (0,1).
DataSplit split(std::vector<ManifestEntry> entries, const SplitConfig& config);

/// Index batches for one epoch. The order is a shuffle keyed by (seed, epoch);
/// a final batch of exactly one sample is dropped (BatchNorm cannot train on
/// it) and reported through dropped.
std::vector<std::vector<std::size_t>> batch_plan(std::size_t count, std::size_t batch_size,
                                                 std::uint64_t seed, std::uint64_t epoch,
                                                 std::size_t* dropped = nullptr);

template <typename T>
struct Batch {
    Tensor<T> images;  ///< [B,48,48,1], values in [0,1]
    std::vector<int> labels;
    std::vector<std::size_t> indices;  ///< dataset positions of the rows
};

/// Labeled 48x48 grayscale samples, either decoded from files listed in a
/// manifest or supplied directly. Pixels come out scaled to [0,1] by /255.
class ImageDataset {
public:
    /// File-backed. Paths are resolved against images_root. With cache_images
    /// set, each image is decoded once and kept in memory.
    ImageDataset(std::vector<ManifestEntry> entries, std::filesystem::path images_root,
                 bool cache_images = true);

    /// In-memory samples; each image is [48,48,1] with gray levels in [0,255].
    static ImageDataset from_images(std::vector<Tensor<float>> images, std::vector<int> labels);

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const ManifestEntry& entry(std::size_t i) const { return entries_.at(i); }
    [[nodiscard]] const std::vector<ManifestEntry>& entries() const { return entries_; }

    /// The 48*48 normalized pixels of sample i.
    [[nodiscard]] std::vector<float> pixels(std::size_t i) const;

    /// Gathers the given samples into one batch. Decoding runs through
    /// parallel_for; row order always follows indices.
    template <typename T>
    [[nodiscard]] Batch<T> make_batch(std::span<const std::size_t> indices) const;

private:
    ImageDataset() = default;
    [[nodiscard]] std::vector<float> decode(std::size_t i) const;

    std::vector<ManifestEntry> entries_;
    std::filesystem::path root_;
    bool cache_images_ = true;
    mutable std::vector<std::vector<float>> cache_;
};

/// Materializes every batch of one epoch. Dropped single-sample tails are
/// reported on log when it is non-null. Throws DataError for an empty dataset.
template <typename T>
std::vector<Batch<T>> batches(const ImageDataset& dataset, std::size_t batch_size,
                              std::uint64_t shuffle_seed, std::uint64_t epoch,
                              std::ostream* log = nullptr);

}  // namespace fer
