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
#include <string>

#include "fer/model.hpp"

namespace fer {

/// Checkpoint file layout, all integers little-endian:
///
///   "FERCKPT1"                      8-byte magic
///   u16 version                     currently 1
///   u32 length, bytes               model fingerprint (UTF-8 text)
///   u32 epoch, u64 seed             training metadata
///   u32 block count, then per block:
///     u16 length, bytes             parameter name
///     u8 rank, u32 dims[rank]
///     f32 values[prod(dims)]
///   u32 CRC-32 of all preceding bytes
///
/// Blocks cover every trainable parameter followed by the BatchNorm running
/// statistics, in model order.
inline constexpr char kCheckpointMagic[8] = {'F', 'E', 'R', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint32_t epoch = 0;
    std::uint64_t seed = 0;
};

/// Writes atomically (temporary file + rename). Values are stored as float32
/// regardless of T. Throws DataError if the file cannot be written.
template <typename T>
void save_checkpoint(FerModel<T>& model, const std::filesystem::path& path,
                     const CheckpointMeta& meta = {});

/// Builds a model for arch and fills it from path. Throws CheckpointError on
/// bad magic or version, truncation, checksum failure, or when the stored
/// fingerprint differs from the one arch produces.
template <typename T>
FerModel<T> load_checkpoint(const std::filesystem::path& path,
                            const ArchConfig& arch = fer_architecture(),
                            CheckpointMeta* meta = nullptr);

}  // namespace fer
