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

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fer/data.hpp"
#include "fer/error.hpp"

#if defined(FER_HAVE_PNG)
#include <png.h>
#endif
#if defined(FER_HAVE_JPEG)
#include <cstdio>
#include <jpeglib.h>
#endif

namespace fer {

namespace {

constexpr float kRedWeight = 0.299f;
constexpr float kGreenWeight = 0.587f;
constexpr float kBlueWeight = 0.114f;

float luminosity(float r, float g, float b) {
    return kRedWeight * r + kGreenWeight * g + kBlueWeight * b;
}

class PnmReader {
public:
    explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    Tensor<float> read() {
        const bool color = bytes_[1] == '6';
        pos_ = 2;
        const std::size_t width = next_number("width");
        const std::size_t height = next_number("height");
        const std::size_t maxval = next_number("maxval");
        if (width == 0 || height == 0) throw DataError("PNM image has a zero dimension");
        if (maxval == 0 || maxval > 65535) {
            throw DataError("PNM maxval " + std::to_string(maxval) + " is out of range");
        }
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
            throw DataError("PNM header is not followed by whitespace");
        }
        ++pos_;

        const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
        const std::size_t channels = color ? 3 : 1;
        const std::size_t needed = width * height * channels * bytes_per_sample;
        if (bytes_.size() - pos_ < needed) {
            throw DataError("PNM raster truncated: need " + std::to_string(needed) + " bytes, have " +
                            std::to_string(bytes_.size() - pos_));
        }

        const float scale = 255.0f / static_cast<float>(maxval);
        auto sample = [&](std::size_t idx) -> float {
            const std::uint8_t* p = bytes_.data() + pos_ + idx * bytes_per_sample;
            const unsigned raw = bytes_per_sample == 2 ? (unsigned{p[0]} << 8) | p[1] : p[0];
            if (raw > maxval) throw DataError("PNM sample exceeds maxval");
            return maxval == 255 ? static_cast<float>(raw) : static_cast<float>(raw) * scale;
        };

        Tensor<float> image({height, width, 1});
        for (std::size_t i = 0; i < width * height; ++i) {
            image[i] = color ? luminosity(sample(3 * i), sample(3 * i + 1), sample(3 * i + 2))
                             : sample(i);
        }
        return image;
    }

private:
    static bool is_space(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    }

    std::size_t next_number(const char* what) {
        for (;;) {
            while (pos_ < bytes_.size() && is_space(bytes_[pos_])) ++pos_;
            if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (++digits > 9) throw DataError(std::string("PNM ") + what + " is too large");
            ++pos_;
        }
        if (digits == 0) throw DataError(std::string("PNM header is missing the ") + what);
        return value;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

#if defined(FER_HAVE_PNG)
Tensor<float> decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw DataError(std::string("PNG decode failed: ") + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raster.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DataError("PNG decode failed: " + msg);
    }
    const std::size_t h = image.height, w = image.width;
    Tensor<float> out({h, w, 1});
    for (std::size_t i = 0; i < h * w; ++i) {
        out[i] = color ? luminosity(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2])
                       : static_cast<float>(raster[i]);
    }
    return out;
}
#endif

#if defined(FER_HAVE_JPEG)
struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Kept free of objects with non-trivial destructors between setjmp and the
// longjmp sites; the raster is owned by the caller.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& raster,
                     std::size_t& height, std::size_t& width, bool& color, char* message) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        std::strncpy(message, err.message, JMSG_LENGTH_MAX);
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    color = cinfo.num_components != 1;
    cinfo.out_color_space = color ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_start_decompress(&cinfo);
    height = cinfo.output_height;
    width = cinfo.output_width;
    const std::size_t stride = width * static_cast<std::size_t>(cinfo.output_components);
    raster.resize(stride * height);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = raster.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

Tensor<float> decode_jpeg(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> raster;
    std::size_t h = 0, w = 0;
    bool color = false;
    char message[JMSG_LENGTH_MAX] = {};
    if (!decode_jpeg_raw(bytes, raster, h, w, color, message)) {
        throw DataError(std::string("JPEG decode failed: ") + message);
    }
    Tensor<float> out({h, w, 1});
    for (std::size_t i = 0; i < h * w; ++i) {
        out[i] = color ? luminosity(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2])
                       : static_cast<float>(raster[i]);
    }
    return out;
}
#endif

}  // namespace

Tensor<float> decode_grayscale(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        return PnmReader(bytes).read();
    }
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
        bytes[3] == 'G') {
#if defined(FER_HAVE_PNG)
        return decode_png(bytes);
#else
        throw DataError("PNG support was not compiled in");
#endif
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
#if defined(FER_HAVE_JPEG)
        return decode_jpeg(bytes);
#else
        throw DataError("JPEG support was not compiled in");
#endif
    }
    throw DataError("unsupported image format (expected binary PGM/PPM, PNG or JPEG)");
}

Tensor<float> load_grayscale(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_grayscale(bytes);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pgm(const Tensor<float>& image) {
    if (image.rank() != 3 || image.dim(2) != 1) {
        throw ShapeError("encode_pgm expects [H,W,1], got " + to_string(image.shape()));
    }
    const std::string header = "P5\n" + std::to_string(image.dim(1)) + " " +
                               std::to_string(image.dim(0)) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.size());
    for (float v : image.values()) {
        const float clamped = std::min(255.0f, std::max(0.0f, v));
        out.push_back(static_cast<std::uint8_t>(clamped + 0.5f));
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const Tensor<float>& image) {
    const auto bytes = encode_pgm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write image " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing image " + path.string());
}

}  // namespace fer
