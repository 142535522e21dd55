/* Copyright (c) 2026 The resfu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstddef>
#include <functional>

namespace resfu {

// Worker count used by every pixel-parallel kernel. Defaults to
// RESFU_NUM_THREADS when set, else std::thread::hardware_concurrency().
std::size_t num_threads() noexcept;
void set_num_threads(std::size_t n) noexcept;

// Splits [0, count) into contiguous chunks, one per worker. Each index is
// visited exactly once and work inside an index never crosses threads, so
// results do not depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace resfu
