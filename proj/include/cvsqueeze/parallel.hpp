// Copyright 2026 The cvsqueeze Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cvsqueeze {

/// Runs body(i) for i in [0, count) across worker threads. Each index must
/// write only its own output slot; results are then bitwise independent of
/// the thread count. Falls back to a plain loop when one thread suffices.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body,
                         unsigned n_threads = std::thread::hardware_concurrency()) {
    if (n_threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    if (n_threads > count) {
        n_threads = static_cast<unsigned>(count);
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    std::vector<std::exception_ptr> errors(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += n_threads) {
                    body(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto &w : workers) {
        w.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace cvsqueeze
