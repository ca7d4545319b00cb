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

#include <string_view>

namespace fer::simd {

/// Instruction-set variants the numeric kernels are built for.
enum class Isa {
    generic,  ///< portable scalar reference
    avx2,     ///< x86-64 AVX2 + FMA
};

std::string_view isa_name(Isa isa);

/// Parses "generic", "scalar", "avx2" or "auto". Throws std::invalid_argument.
Isa parse_isa(std::string_view name);

/// True when the variant was compiled in and the running CPU supports it.
bool isa_supported(Isa isa);

/// Best variant for this machine.
Isa detect_isa();

/// Variant the dispatching kernels currently route to. Initialised from
/// detect_isa(), or from the FER_ISA environment variable when set.
Isa active_isa();

/// Overrides the dispatch target. Not synchronised with running kernels;
/// call it before starting work. Throws std::invalid_argument if unsupported.
void set_active_isa(Isa isa);

}  // namespace fer::simd
