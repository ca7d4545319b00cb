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

#include "fer/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "fer/error.hpp"
#include "fer/labels.hpp"

namespace fer {

AnnotationResult convert_annotations(const std::filesystem::path& dir,
                                     const AnnotationOptions& options) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("annotation directory " + dir.string() + " not found");

    std::vector<fs::path> files;
    for (const auto& item : fs::directory_iterator(dir)) {
        if (item.is_regular_file() && item.path().extension() == ".txt") files.push_back(item.path());
    }
    std::sort(files.begin(), files.end());

    AnnotationResult result;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw DataError("cannot open annotation file " + file.string());
        ++result.files;
        const std::string video = file.stem().string();
        std::string line;
        std::size_t line_no = 0;
        std::size_t frame = 0;
        while (std::getline(in, line)) {
            ++line_no;
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty()) continue;
            int label = 0;
            const auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), label);
            if (ec != std::errc{} || end != line.data() + line.size()) {
                if (line_no == 1) continue;
                throw DataError(file.string() + " line " + std::to_string(line_no) +
                                ": label \"" + line + "\" is not an integer");
            }
            ++frame;
            if (label < 0 || label >= static_cast<int>(kNumExpressions)) {
                ++result.skipped_labels;
                continue;
            }
            char name[32];
            std::snprintf(name, sizeof name, "%0*zu", options.frame_digits, frame);
            std::string rel = video + "/" + name + options.frame_extension;
            if (options.images_root && !fs::exists(*options.images_root / rel)) {
                ++result.missing_images;
                continue;
            }
            result.entries.push_back({std::move(rel), label});
        }
    }
    return result;
}

}  // namespace fer
