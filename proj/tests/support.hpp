/*
 * Copyright 2026 The cimsync Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reference helpers shared by the test suites. None of them call into the
// library code they are used to check.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cimsync/model_ir.hpp"

namespace testing_support {

/// Number of tiles of at most `size` needed to cover `total`, by counting.
inline int count_tiles(long long total, int size) {
    int tiles = 0;
    for (long long left = total; left > 0; left -= size) ++tiles;
    return tiles;
}

/// Effective tile sizes, by repeated subtraction.
inline std::vector<int> tile_sizes(long long total, int size) {
    std::vector<int> out;
    for (long long left = total; left > 0; left -= size) out.push_back(static_cast<int>(left < size ? left : size));
    return out;
}

/// Kernel matrix entry of kernel `k` at unrolled column `col`, decoding the
/// column with z innermost.
inline std::int8_t kernel_entry(const cimsync::LayerSpec& l, int k, long long col) {
    const int z = static_cast<int>(col % l.kernel.kz);
    const int x = static_cast<int>((col / l.kernel.kz) % l.kernel.kx);
    const int y = static_cast<int>(col / (static_cast<long long>(l.kernel.kz) * l.kernel.kx));
    const std::size_t flat =
        ((static_cast<std::size_t>(y) * l.kernel.kx + x) * l.kernel.kz + z) * l.kernel.knum + k;
    return l.weights[flat];
}

/// Little-endian blob holding int8 weights followed by int32 biases.
inline std::vector<std::uint8_t> blob_of(const std::vector<std::int8_t>& w, const std::vector<std::int32_t>& b) {
    std::vector<std::uint8_t> out(w.begin(), w.end());
    for (const auto v : b) {
        const auto u = static_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    return out;
}

inline std::vector<std::int8_t> random_bytes(std::size_t n, std::mt19937& rng) {
    std::vector<std::int8_t> out(n);
    for (auto& v : out) v = static_cast<std::int8_t>(rng() & 0xff);
    return out;
}

}  // namespace testing_support
