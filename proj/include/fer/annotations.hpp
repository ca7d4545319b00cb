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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fer/data.hpp"

namespace fer {

struct AnnotationOptions {
    std::string frame_extension = ".jpg";
    int frame_digits = 5;
    /// When set, frames whose image file is missing under this root are skipped.
    std::optional<std::filesystem::path> images_root;
};

struct AnnotationResult {
    std::vector<ManifestEntry> entries;
    std::size_t files = 0;
    std::size_t skipped_labels = 0;
    std::size_t missing_images = 0;
};

/// Converts a directory of per-video annotation files (one integer label per
/// line, line i <-> frame i counted from 1) into manifest entries of the form
/// "<video>/<frame, zero-padded><ext>". A non-numeric first line is treated
/// as a header. Files are visited in name order.
AnnotationResult convert_annotations(const std::filesystem::path& dir,
                                     const AnnotationOptions& options = {});

}  // namespace fer
