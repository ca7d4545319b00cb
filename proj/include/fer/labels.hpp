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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace fer {

inline constexpr std::size_t kNumExpressions = 7;

/// Class index -> expression name. The order is fixed and is part of the
/// checkpoint fingerprint.
inline constexpr std::array<std::string_view, kNumExpressions> kExpressionLabels = {
    "neutral", "anger", "disgust", "fear", "happiness", "sadness", "surprise"};

inline std::optional<int> label_index(std::string_view name) {
    for (std::size_t i = 0; i < kExpressionLabels.size(); ++i) {
        if (kExpressionLabels[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

}  // namespace fer
