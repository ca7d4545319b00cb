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

#include "fer/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "fer/error.hpp"
#include "fer/labels.hpp"
#include "fer/parallel.hpp"

namespace fer {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (std::uint64_t{words[0]} << 32) | words[1];
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

Manifest parse_manifest(std::istream& in, std::string_view source) {
    const auto fail = [&](std::size_t line, const std::string& why) {
        return DataError(std::string(source) + " line " + std::to_string(line) + ": " + why);
    };

    Manifest manifest;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "path,label") throw fail(line_no, "expected header \"path,label\"");
            header_seen = true;
            continue;
        }
        const auto comma = line.rfind(',');
        if (comma == std::string_view::npos) throw fail(line_no, "expected \"path,label\"");
        std::string_view path = trim(line.substr(0, comma));
        const std::string_view label_text = trim(line.substr(comma + 1));
        if (path.size() >= 2 && path.front() == '"' && path.back() == '"') {
            path = path.substr(1, path.size() - 2);
        }
        if (path.empty()) throw fail(line_no, "empty image path");
        int label = 0;
        const auto [end, ec] =
            std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
        if (ec != std::errc{} || end != label_text.data() + label_text.size()) {
            throw fail(line_no, "label \"" + std::string(label_text) + "\" is not an integer");
        }
        if (label < 0 || label >= static_cast<int>(kNumExpressions)) {
            ++manifest.skipped;
            continue;
        }
        manifest.entries.push_back({std::string(path), label});
    }
    if (in.bad()) throw DataError(std::string(source) + ": read error");
    if (!header_seen) throw DataError(std::string(source) + ": missing \"path,label\" header");
    return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    return parse_manifest(in, path.string());
}

void write_manifest(std::ostream& out, std::span<const ManifestEntry> entries) {
    out << "path,label\n";
    for (const auto& e : entries) out << e.image_path << ',' << e.label << '\n';
}

// ---------------------------------------------------------------------------
// Resize

Tensor<float> resize_bilinear(const Tensor<float>& image, std::size_t out_h, std::size_t out_w) {
    if (image.rank() != 3 || image.dim(2) != 1) {
        throw ShapeError("resize_bilinear expects [H,W,1], got " + to_string(image.shape()));
    }
    const std::size_t in_h = image.dim(0), in_w = image.dim(1);
    Tensor<float> out({out_h, out_w, 1});

    struct Tap {
        std::size_t lo, hi;
        double frac;
    };
    const auto taps = [](std::size_t in, std::size_t out_size) {
        std::vector<Tap> t(out_size);
        const double scale = static_cast<double>(in) / static_cast<double>(out_size);
        for (std::size_t d = 0; d < out_size; ++d) {
            double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
            src = std::clamp(src, 0.0, static_cast<double>(in - 1));
            const auto lo = static_cast<std::size_t>(std::floor(src));
            t[d] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
        }
        return t;
    };
    const auto ys = taps(in_h, out_h);
    const auto xs = taps(in_w, out_w);

    for (std::size_t y = 0; y < out_h; ++y) {
        const Tap& ty = ys[y];
        for (std::size_t x = 0; x < out_w; ++x) {
            const Tap& tx = xs[x];
            const double v00 = image[ty.lo * in_w + tx.lo];
            const double v01 = image[ty.lo * in_w + tx.hi];
            const double v10 = image[ty.hi * in_w + tx.lo];
            const double v11 = image[ty.hi * in_w + tx.hi];
            const double top = v00 + (v01 - v00) * tx.frac;
            const double bottom = v10 + (v11 - v10) * tx.frac;
            out[y * out_w + x] = static_cast<float>(top + (bottom - top) * ty.frac);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Split and batching

DataSplit split(std::vector<ManifestEntry> entries, const SplitConfig& config) {
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
    }
    if (entries.size() < 2) {
        throw DataError("cannot split " + std::to_string(entries.size()) +
                        " entries; need at least 2");
    }
    std::mt19937_64 rng(config.seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::floor(config.train_fraction * static_cast<double>(entries.size()) + 1e-9));

    DataSplit out;
    out.train.assign(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.validation.assign(entries.begin() + static_cast<std::ptrdiff_t>(n_train), entries.end());
    return out;
}

std::vector<std::vector<std::size_t>> batch_plan(std::size_t count, std::size_t batch_size,
                                                 std::uint64_t seed, std::uint64_t epoch,
                                                 std::size_t* dropped) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    if (count == 0) throw DataError("cannot batch an empty dataset");

    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    std::mt19937_64 rng(epoch_seed(seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<std::size_t>> plan;
    std::size_t lost = 0;
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t end = std::min(count, start + batch_size);
        if (end - start == 1 && batch_size > 1) {
            lost = 1;
            break;
        }
        plan.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                          order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (dropped != nullptr) *dropped = lost;
    return plan;
}

// ---------------------------------------------------------------------------
// ImageDataset

ImageDataset::ImageDataset(std::vector<ManifestEntry> entries, std::filesystem::path images_root,
                           bool cache_images)
    : entries_(std::move(entries)), root_(std::move(images_root)), cache_images_(cache_images) {
    if (cache_images_) cache_.resize(entries_.size());
}

ImageDataset ImageDataset::from_images(std::vector<Tensor<float>> images, std::vector<int> labels) {
    if (images.size() != labels.size()) {
        throw DataError("from_images: " + std::to_string(images.size()) + " images but " +
                        std::to_string(labels.size()) + " labels");
    }
    ImageDataset ds;
    ds.cache_images_ = true;
    ds.cache_.resize(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].shape() != Shape{kImageSide, kImageSide, 1}) {
            throw ShapeError("from_images: image " + std::to_string(i) + " has shape " +
                             to_string(images[i].shape()) + ", expected [48x48x1]");
        }
        auto& px = ds.cache_[i];
        px.resize(images[i].size());
        for (std::size_t k = 0; k < px.size(); ++k) px[k] = images[i][k] / 255.0f;
        ds.entries_.push_back({"memory:" + std::to_string(i), labels[i]});
    }
    return ds;
}

std::vector<float> ImageDataset::decode(std::size_t i) const {
    const ManifestEntry& e = entries_.at(i);
    Tensor<float> gray = load_grayscale(root_ / e.image_path);
    if (gray.dim(0) != kImageSide || gray.dim(1) != kImageSide) gray = resize_bilinear(gray);
    std::vector<float> px(gray.size());
    for (std::size_t k = 0; k < px.size(); ++k) px[k] = gray[k] / 255.0f;
    return px;
}

std::vector<float> ImageDataset::pixels(std::size_t i) const {
    if (cache_images_) {
        auto& slot = cache_.at(i);
        if (slot.empty()) slot = decode(i);
        return slot;
    }
    return decode(i);
}

template <typename T>
Batch<T> ImageDataset::make_batch(std::span<const std::size_t> indices) const {
    constexpr std::size_t plane = kImageSide * kImageSide;
    Batch<T> batch{Tensor<T>({indices.size(), kImageSide, kImageSide, 1}), {}, {}};
    batch.labels.resize(indices.size());
    batch.indices.assign(indices.begin(), indices.end());
    parallel_for(indices.size(), [&](std::size_t r) {
        const std::vector<float> px = pixels(indices[r]);
        std::transform(px.begin(), px.end(), batch.images.data() + r * plane,
                       [](float v) { return static_cast<T>(v); });
        batch.labels[r] = entries_[indices[r]].label;
    });
    return batch;
}

template <typename T>
std::vector<Batch<T>> batches(const ImageDataset& dataset, std::size_t batch_size,
                              std::uint64_t shuffle_seed, std::uint64_t epoch, std::ostream* log) {
    std::size_t dropped = 0;
    const auto plan = batch_plan(dataset.size(), batch_size, shuffle_seed, epoch, &dropped);
    if (dropped != 0 && log != nullptr) {
        *log << "warning: dropped " << dropped
             << " sample from the final batch of epoch " << epoch
             << " (BatchNorm needs at least 2 samples)\n";
    }
    std::vector<Batch<T>> out;
    out.reserve(plan.size());
    for (const auto& idx : plan) out.push_back(dataset.make_batch<T>(idx));
    return out;
}

template Batch<float> ImageDataset::make_batch<float>(std::span<const std::size_t>) const;
template Batch<double> ImageDataset::make_batch<double>(std::span<const std::size_t>) const;
template std::vector<Batch<float>> batches(const ImageDataset&, std::size_t, std::uint64_t,
                                           std::uint64_t, std::ostream*);
template std::vector<Batch<double>> batches(const ImageDataset&, std::size_t, std::uint64_t,
                                            std::uint64_t, std::ostream*);

}  // namespace fer
