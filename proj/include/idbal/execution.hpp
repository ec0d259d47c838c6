/*
 * Copyright 2026 The idbal Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>

namespace idbal {

// Every data-parallel kernel has a serial reference path and an OpenMP path.
// Both produce bit-identical results: parallel loops write per-item slots and
// reductions are finished serially in index order.
enum class Execution : std::uint8_t { kSerial, kParallel };

// Number of OpenMP threads the parallel path will use (1 when built without
// OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace idbal
