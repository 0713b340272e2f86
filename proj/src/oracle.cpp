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

#include "cimsync/oracle.hpp"

#include <algorithm>

#include "cimsync/error.hpp"

namespace cimsync::oracle {

namespace {

struct Geometry {
    int oy, ox;
    int pad_y, pad_x;
};

int out_dim(int in, int k, int s, Padding p) {
    if (p == Padding::same) return (in + s - 1) / s;
    return in < k ? 0 : (in - k) / s + 1;
}

int lead_pad(int in, int k, int s, int out, Padding p) {
    if (p == Padding::valid) return 0;
    return std::max((out - 1) * s + k - in, 0) / 2;
}

Geometry geometry(const LayerSpec& l) {
    Geometry g{};
    g.oy = out_dim(l.input.iy, l.kernel.ky, l.stride.y, l.padding);
    g.ox = out_dim(l.input.ix, l.kernel.kx, l.stride.x, l.padding);
    if (g.oy < 1 || g.ox < 1) throw ShapeError("oracle: layer '" + l.name + "' has an empty output");
    g.pad_y = lead_pad(l.input.iy, l.kernel.ky, l.stride.y, g.oy, l.padding);
    g.pad_x = lead_pad(l.input.ix, l.kernel.kx, l.stride.x, g.ox, l.padding);
    return g;
}

void check_ifm(const LayerSpec& l, std::span<const std::int8_t> ifm) {
    if (static_cast<std::int64_t>(ifm.size()) != std::int64_t{l.input.iy} * l.input.ix * l.input.iz)
        throw ShapeError("oracle: IFM size does not match layer '" + l.name + "'");
}

}  // namespace

std::int32_t activate(Activation act, std::int32_t v) {
    switch (act) {
        case Activation::none: return v;
        case Activation::relu: return v < 0 ? 0 : v;
        case Activation::leaky_relu: return v < 0 ? (v >> 3) : v;
    }
    return v;
}

std::vector<std::int32_t> golden_conv2d(const LayerSpec& l, std::span<const std::int8_t> ifm) {
    check_ifm(l, ifm);
    const auto g = geometry(l);
    const int KY = l.kernel.ky, KX = l.kernel.kx, KZ = l.kernel.kz, KN = l.kernel.knum;
    const int IY = l.input.iy, IX = l.input.ix, IZ = l.input.iz;
    std::vector<std::int32_t> out(static_cast<std::size_t>(g.oy) * g.ox * KN);
    for (int y = 0; y < g.oy; ++y)
        for (int x = 0; x < g.ox; ++x)
            for (int k = 0; k < KN; ++k) {
                std::int32_t sum = l.biases[static_cast<std::size_t>(k)];
                for (int dy = 0; dy < KY; ++dy)
                    for (int dx = 0; dx < KX; ++dx)
                        for (int z = 0; z < KZ; ++z) {
                            const int iy = y * l.stride.y + dy - g.pad_y;
                            const int ix = x * l.stride.x + dx - g.pad_x;
                            if (iy < 0 || iy >= IY || ix < 0 || ix >= IX) continue;
                            const std::int32_t a = ifm[(static_cast<std::size_t>(iy) * IX + ix) * IZ + z];
                            const std::int32_t w =
                                l.weights[((static_cast<std::size_t>(dy) * KX + dx) * KZ + z) * KN + k];
                            sum += a * w;
                        }
                out[(static_cast<std::size_t>(y) * g.ox + x) * KN + k] = activate(l.activation, sum);
            }
    return out;
}

std::vector<std::int32_t> golden_im2col_mvm(const LayerSpec& l, std::span<const std::int8_t> ifm) {
    check_ifm(l, ifm);
    const auto g = geometry(l);
    const int KY = l.kernel.ky, KX = l.kernel.kx, KZ = l.kernel.kz, KN = l.kernel.knum;
    const std::size_t cols = static_cast<std::size_t>(KY) * KX * KZ;

    // Kernel matrix: one row per kernel, columns in (dy, dx, z) order.
    std::vector<std::int32_t> matrix(static_cast<std::size_t>(KN) * cols);
    for (std::size_t c = 0; c < cols; ++c) {
        const auto z = static_cast<int>(c % KZ);
        const auto dx = static_cast<int>((c / KZ) % KX);
        const auto dy = static_cast<int>(c / (static_cast<std::size_t>(KZ) * KX));
        for (int k = 0; k < KN; ++k)
            matrix[static_cast<std::size_t>(k) * cols + c] =
                l.weights[static_cast<std::size_t>(((dy * KX + dx) * KZ + z)) * KN + k];
    }

    std::vector<std::int32_t> out(static_cast<std::size_t>(g.oy) * g.ox * KN);
    std::vector<std::int32_t> vec(cols);
    for (int j = 0; j < g.oy * g.ox; ++j) {
        const int y = j / g.ox, x = j % g.ox;
        for (std::size_t c = 0; c < cols; ++c) {
            const auto z = static_cast<int>(c % KZ);
            const auto dx = static_cast<int>((c / KZ) % KX);
            const auto dy = static_cast<int>(c / (static_cast<std::size_t>(KZ) * KX));
            const int iy = y * l.stride.y - g.pad_y + dy;
            const int ix = x * l.stride.x - g.pad_x + dx;
            const bool inside = iy >= 0 && iy < l.input.iy && ix >= 0 && ix < l.input.ix;
            vec[c] = inside ? ifm[(static_cast<std::size_t>(iy) * l.input.ix + ix) * l.input.iz + z] : 0;
        }
        for (int k = 0; k < KN; ++k) {
            const auto* row = matrix.data() + static_cast<std::size_t>(k) * cols;
            std::int32_t sum = 0;
            for (std::size_t c = 0; c < cols; ++c) sum += row[c] * vec[c];
            out[static_cast<std::size_t>(j) * KN + k] = activate(l.activation, sum + l.biases[static_cast<std::size_t>(k)]);
        }
    }
    return out;
}

}  // namespace cimsync::oracle
