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

#include "fer/simd/isa.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fer::simd {

namespace {

Isa initial_isa() {
    if (const char* env = std::getenv("FER_ISA"); env != nullptr && *env != '\0') {
        const Isa requested = parse_isa(env);
        if (isa_supported(requested)) return requested;
    }
    return detect_isa();
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::generic: return "generic";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa parse_isa(std::string_view name) {
    if (name == "generic" || name == "scalar") return Isa::generic;
    if (name == "avx2") return Isa::avx2;
    if (name == "auto") return detect_isa();
    throw std::invalid_argument("unknown kernel ISA '" + std::string(name) + "'");
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::generic: return true;
        case Isa::avx2:
#if defined(FER_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Isa detect_isa() { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::generic; }

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("kernel ISA '" + std::string(isa_name(isa)) +
                                    "' is not available on this machine");
    }
    active_slot().store(isa, std::memory_order_relaxed);
}

}  // namespace fer::simd
