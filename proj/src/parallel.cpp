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

#include "fer/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fer {

namespace {
std::atomic<std::size_t> g_threads{1};
}

std::size_t num_threads() { return g_threads.load(std::memory_order_relaxed); }

void set_num_threads(std::size_t n) { g_threads.store(std::max<std::size_t>(n, 1)); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min(num_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run_range = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) task(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const std::size_t per = count / workers;
    const std::size_t extra = count % workers;
    std::size_t begin = 0;
    std::size_t first_end = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t end = begin + per + (w < extra ? 1 : 0);
        if (w == 0) {
            first_end = end;
        } else {
            pool.emplace_back(run_range, begin, end);
        }
        begin = end;
    }
    run_range(0, first_end);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fer
