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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fer/annotations.hpp"
#include "fer/data.hpp"
#include "fer/synthetic.hpp"

using namespace fer;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("fercnn_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::vector<ManifestEntry> numbered(std::size_t n) {
    std::vector<ManifestEntry> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"img" + std::to_string(i) + ".pgm", static_cast<int>(i % 7)});
    return out;
}

// Two RGB pixels: pure red, pure blue.
const std::uint8_t kRedBluePng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00,
    0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x08, 0x02, 0x00, 0x00, 0x00, 0x7b, 0x40, 0xe8, 0xdd, 0x00, 0x00, 0x00,
    0x0f, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0, 0xc0, 0xf0, 0x1f, 0x00, 0x07, 0x00,
    0x01, 0xff, 0x7e, 0x08, 0xb1, 0xd0, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};

// 8x8 grayscale JPEG, every pixel 128.
const std::uint8_t kGrayJpeg[] = {
    0xff, 0xd8, 0xff, 0xe0, 0x00, 0x10, 0x4a, 0x46, 0x49, 0x46, 0x00, 0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01,
    0x00, 0x00, 0xff, 0xdb, 0x00, 0x43, 0x00, 0x02, 0x01, 0x01, 0x01, 0x01, 0x01, 0x02, 0x01, 0x01, 0x01, 0x02,
    0x02, 0x02, 0x02, 0x02, 0x04, 0x03, 0x02, 0x02, 0x02, 0x02, 0x05, 0x04, 0x04, 0x03, 0x04, 0x06, 0x05, 0x06,
    0x06, 0x06, 0x05, 0x06, 0x06, 0x06, 0x07, 0x09, 0x08, 0x06, 0x07, 0x09, 0x07, 0x06, 0x06, 0x08, 0x0b, 0x08,
    0x09, 0x0a, 0x0a, 0x0a, 0x0a, 0x0a, 0x06, 0x08, 0x0b, 0x0c, 0x0b, 0x0a, 0x0c, 0x09, 0x0a, 0x0a, 0x0a, 0xff,
    0xc0, 0x00, 0x0b, 0x08, 0x00, 0x08, 0x00, 0x08, 0x01, 0x01, 0x11, 0x00, 0xff, 0xc4, 0x00, 0x1f, 0x00, 0x00,
    0x01, 0x05, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x02,
    0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0x09, 0x0a, 0x0b, 0xff, 0xc4, 0x00, 0xb5, 0x10, 0x00, 0x02, 0x01, 0x03,
    0x03, 0x02, 0x04, 0x03, 0x05, 0x05, 0x04, 0x04, 0x00, 0x00, 0x01, 0x7d, 0x01, 0x02, 0x03, 0x00, 0x04, 0x11,
    0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08,
    0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18,
    0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67,
    0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9,
    0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9,
    0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
    0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa, 0xff, 0xda, 0x00, 0x08, 0x01, 0x01,
    0x00, 0x00, 0x3f, 0x00, 0x2b, 0xff, 0xd9};

// Half-pixel bilinear sample written directly from the definition.
float bilinear_at(const Tensor<float>& img, std::size_t oh, std::size_t ow, std::size_t i, std::size_t j) {
    const double h = static_cast<double>(img.dim(0)), w = static_cast<double>(img.dim(1));
    double sy = (static_cast<double>(i) + 0.5) * h / static_cast<double>(oh) - 0.5;
    double sx = (static_cast<double>(j) + 0.5) * w / static_cast<double>(ow) - 0.5;
    sy = std::clamp(sy, 0.0, h - 1);
    sx = std::clamp(sx, 0.0, w - 1);
    const auto y0 = static_cast<std::size_t>(sy), x0 = static_cast<std::size_t>(sx);
    const std::size_t y1 = std::min(y0 + 1, img.dim(0) - 1), x1 = std::min(x0 + 1, img.dim(1) - 1);
    const double fy = sy - static_cast<double>(y0), fx = sx - static_cast<double>(x0);
    auto px = [&](std::size_t y, std::size_t x) { return static_cast<double>(img[y * img.dim(1) + x]); };
    return static_cast<float>((1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x1)) +
                              fy * ((1 - fx) * px(y1, x0) + fx * px(y1, x1)));
}

}  // namespace

TEST(Manifest, ParsesValidRows) {
    std::istringstream in("path,label\na.pgm,0\nb/c.pgm,4\n\"d,e.pgm\",6\n");
    const auto m = parse_manifest(in);
    ASSERT_EQ(m.entries.size(), 3u);
    EXPECT_EQ(m.entries[1], (ManifestEntry{"b/c.pgm", 4}));
    EXPECT_EQ(m.entries[2].image_path, "d,e.pgm");
    EXPECT_EQ(m.skipped, 0u);
}

TEST(Manifest, SkipsOutOfRangeLabels) {
    std::istringstream neg("path,label\na.pgm,-1\nb.pgm,2\n");
    EXPECT_EQ(parse_manifest(neg).skipped, 1u);
    std::istringstream big("path,label\na.pgm,7\nb.pgm,2\n");
    const auto m = parse_manifest(big);
    EXPECT_EQ(m.skipped, 1u);
    EXPECT_EQ(m.entries.size(), 1u);
}

TEST(Manifest, MalformedRowNamesLine) {
    std::istringstream in("path,label\na.pgm,1\nb.pgm,x\n");
    try {
        parse_manifest(in, "m.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("m.csv line 3"), std::string::npos) << e.what();
    }
    std::istringstream header("file,class\na.pgm,1\n");
    EXPECT_THROW(parse_manifest(header), DataError);
    EXPECT_THROW(load_manifest("/nonexistent/manifest.csv"), DataError);
}

TEST(Manifest, WriteReadRoundTrip) {
    const auto entries = numbered(9);
    std::stringstream s;
    write_manifest(s, entries);
    EXPECT_EQ(parse_manifest(s).entries, entries);
}

TEST(Decode, ConstantPgm) {
    std::string pgm = "P5\n4 3\n255\n" + std::string(12, static_cast<char>(128));
    const auto img = decode_grayscale(bytes_of(pgm));
    EXPECT_EQ(img, Tensor<float>({3, 4, 1}, 128.f));
}

TEST(Decode, PpmUsesLuminosityWeights) {
    std::string ppm = "P6\n# comment\n2 1\n255\n";
    ppm += std::string{static_cast<char>(255), 0, 0, 0, 0, static_cast<char>(255)};
    const auto img = decode_grayscale(bytes_of(ppm));
    EXPECT_FLOAT_EQ(img[0], 0.299f * 255.f);
    EXPECT_FLOAT_EQ(img[1], 0.114f * 255.f);
}

TEST(Decode, PngAndJpeg) {
    const auto png = decode_grayscale({kRedBluePng, sizeof kRedBluePng});
    ASSERT_EQ(png.shape(), (Shape{1, 2, 1}));
    EXPECT_FLOAT_EQ(png[0], 0.299f * 255.f);
    EXPECT_FLOAT_EQ(png[1], 0.114f * 255.f);
    const auto jpg = decode_grayscale({kGrayJpeg, sizeof kGrayJpeg});
    ASSERT_EQ(jpg.shape(), (Shape{8, 8, 1}));
    for (float v : jpg.values()) EXPECT_NEAR(v, 128.f, 1.f);
}

TEST(Decode, RejectsGarbage) {
    EXPECT_THROW(decode_grayscale(bytes_of("GIF89a....")), DataError);
    EXPECT_THROW(decode_grayscale(bytes_of("P5\n4 4\n255\nabc")), DataError);
    std::vector<std::uint8_t> cut(kRedBluePng, kRedBluePng + 40);
    EXPECT_THROW(decode_grayscale(cut), DataError);
    std::vector<std::uint8_t> jcut(kGrayJpeg, kGrayJpeg + 100);
    EXPECT_THROW(decode_grayscale(jcut), DataError);
}

TEST(Decode, GradientPgmRoundTrip) {
    Tensor<float> img({16, 16, 1});
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(i);
    EXPECT_EQ(decode_grayscale(encode_pgm(img)), img);
    const fs::path dir = scratch_dir("pgm");
    write_pgm(dir / "g.pgm", img);
    EXPECT_EQ(load_grayscale(dir / "g.pgm"), img);
}

TEST(Resize, IdentityAndConstants) {
    std::mt19937_64 rng(1);
    Tensor<float> img({48, 48, 1});
    for (auto& v : img.values()) v = static_cast<float>(rng() % 256);
    EXPECT_EQ(resize_bilinear(img), img);
    const auto c = resize_bilinear(Tensor<float>({96, 96, 1}, 7.f));
    EXPECT_EQ(c, Tensor<float>({48, 48, 1}, 7.f));
    EXPECT_EQ(resize_bilinear(Tensor<float>({1, 1, 1}, 3.f)), Tensor<float>({48, 48, 1}, 3.f));
}

TEST(Resize, CheckerboardMatchesPerPixelOracle) {
    const Tensor<float> board({2, 2, 1}, {0.f, 255.f, 255.f, 0.f});
    const auto up = resize_bilinear(board, 7, 9);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(up[i * 9 + j], bilinear_at(board, 7, 9, i, j), 1e-4);
    const auto down = resize_bilinear(up, 3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(down[i * 2 + j], bilinear_at(up, 3, 2, i, j), 1e-4);
}

TEST(Split, SizesPartitionAndDeterminism) {
    const auto entries = numbered(10);
    const auto a = split(entries, {0.8, 5});
    EXPECT_EQ(a.train.size(), 8u);
    EXPECT_EQ(a.validation.size(), 2u);
    const auto b = split(entries, {0.8, 5});
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.validation, b.validation);
    auto all = a.train;
    all.insert(all.end(), a.validation.begin(), a.validation.end());
    auto sorted_in = entries;
    auto key = [](const ManifestEntry& x, const ManifestEntry& y) { return x.image_path < y.image_path; };
    std::sort(all.begin(), all.end(), key);
    std::sort(sorted_in.begin(), sorted_in.end(), key);
    EXPECT_EQ(all, sorted_in);
    for (std::size_t n : {2u, 3u, 7u, 101u, 1000u}) {
        const auto s = split(numbered(n), {0.8, 1});
        EXPECT_EQ(s.train.size(), n * 8 / 10);
        EXPECT_EQ(s.train.size() + s.validation.size(), n);
    }
    EXPECT_THROW(split(numbered(1), {0.8, 0}), DataError);
    EXPECT_THROW(split(numbered(5), {1.0, 0}), std::invalid_argument);
}

TEST(Batches, SizesAndDropRule) {
    std::size_t dropped = 0;
    auto plan = batch_plan(1030, 512, 3, 1, &dropped);
    ASSERT_EQ(plan.size(), 3u);
    EXPECT_EQ(plan[2].size(), 6u);
    EXPECT_EQ(dropped, 0u);
    plan = batch_plan(1025, 512, 3, 1, &dropped);
    ASSERT_EQ(plan.size(), 2u);
    EXPECT_EQ(dropped, 1u);
    EXPECT_EQ(batch_plan(1025, 512, 3, 1), plan);
    EXPECT_NE(batch_plan(1025, 512, 3, 2), plan);
    EXPECT_THROW(batch_plan(0, 4, 0, 0), DataError);

    // every index appears once per epoch, apart from the dropped one
    std::vector<std::size_t> seen;
    for (const auto& b : batch_plan(1030, 512, 9, 4)) seen.insert(seen.end(), b.begin(), b.end());
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) ASSERT_EQ(seen[i], i);
}

TEST(Batches, DroppedSampleIsLogged) {
    std::vector<Tensor<float>> images(5, Tensor<float>({48, 48, 1}, 255.f));
    const auto ds = ImageDataset::from_images(images, {0, 1, 2, 3, 4});
    std::ostringstream log;
    const auto bs = batches<float>(ds, 2, 1, 1, &log);
    EXPECT_EQ(bs.size(), 2u);
    EXPECT_NE(log.str().find("drop"), std::string::npos);
    for (const auto& b : bs) {
        EXPECT_EQ(b.images.shape(), (Shape{2, 48, 48, 1}));
        for (float v : b.images.values()) EXPECT_EQ(v, 1.0f);
    }
}

TEST(Dataset, FileBackedBatchesAreNormalizedAndOrdered) {
    const fs::path dir = scratch_dir("dataset");
    std::vector<ManifestEntry> entries;
    for (int i = 0; i < 4; ++i) {
        Tensor<float> img({60, 50, 1}, static_cast<float>(i * 60));
        const std::string name = "f" + std::to_string(i) + ".pgm";
        write_pgm(dir / name, img);
        entries.push_back({name, i});
    }
    for (bool cache : {true, false}) {
        ImageDataset ds(entries, dir, cache);
        const std::vector<std::size_t> order{3, 0, 2};
        const auto b = ds.make_batch<double>(order);
        EXPECT_EQ(b.images.shape(), (Shape{3, 48, 48, 1}));
        EXPECT_EQ(b.labels, (std::vector<int>{3, 0, 2}));
        EXPECT_DOUBLE_EQ(b.images.at(0, 10, 10, 0), static_cast<double>(180.f / 255.f));
        EXPECT_DOUBLE_EQ(b.images.at(1, 10, 10, 0), 0.0);
    }
    ImageDataset missing({{"nope.pgm", 1}}, dir, true);
    EXPECT_THROW(missing.make_batch<float>(std::vector<std::size_t>{0}), DataError);
}

TEST(Annotations, ConvertsFramesAndSkipsInvalid) {
    const fs::path dir = scratch_dir("ann");
    write_text(dir / "vid_b.txt", "Neutral,Anger,Disgust,Fear,Happiness,Sadness,Surprise,Other\n4\n-1\n7\n2\n");
    write_text(dir / "vid_a.txt", "0\n6\n");
    const auto r = convert_annotations(dir);
    EXPECT_EQ(r.files, 2u);
    EXPECT_EQ(r.skipped_labels, 2u);
    const std::vector<ManifestEntry> expected{
        {"vid_a/00001.jpg", 0}, {"vid_a/00002.jpg", 6}, {"vid_b/00001.jpg", 4}, {"vid_b/00004.jpg", 2}};
    EXPECT_EQ(r.entries, expected);

    AnnotationOptions opts;
    opts.images_root = dir / "images";
    fs::create_directories(dir / "images" / "vid_a");
    write_text(dir / "images" / "vid_a" / "00002.jpg", "x");
    const auto filtered = convert_annotations(dir, opts);
    ASSERT_EQ(filtered.entries.size(), 1u);
    EXPECT_EQ(filtered.entries[0].image_path, "vid_a/00002.jpg");
    EXPECT_EQ(filtered.missing_images, 3u);
    EXPECT_THROW(convert_annotations(dir / "absent"), DataError);
}

TEST(Synthetic, DeterministicAndWritten) {
    EXPECT_EQ(synthetic_image(3, 64, 7, 2), synthetic_image(3, 64, 7, 2));
    EXPECT_NE(synthetic_image(3, 64, 7, 2), synthetic_image(3, 64, 7, 3));
    const fs::path dir = scratch_dir("synthetic");
    SyntheticConfig cfg;
    cfg.per_class = 2;
    const auto entries = write_synthetic_dataset(dir, cfg);
    EXPECT_EQ(entries.size(), 14u);
    const auto m = load_manifest(dir / "manifest.csv");
    EXPECT_EQ(m.entries, entries);
    for (const auto& e : entries) EXPECT_TRUE(fs::exists(dir / e.image_path));
    const auto ds = synthetic_dataset(cfg);
    EXPECT_EQ(ds.size(), 14u);
    // the in-memory set goes through the same encode, decode and resize path
    ImageDataset files(entries, dir, false);
    EXPECT_EQ(ds.pixels(5), files.pixels(5));
}
