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

#include "cimsync/fixtures.hpp"

#include <string>

#include "cimsync/error.hpp"

namespace cimsync::fixtures {

namespace {

int pick(std::mt19937& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint32_t>(hi - lo + 1));
}

void fill_tensors(LayerSpec& l, std::uint32_t seed) {
    std::mt19937 rng(seed);
    l.weights.resize(static_cast<std::size_t>(l.kernel.element_count()));
    for (auto& w : l.weights) w = static_cast<std::int8_t>(rng() & 0xff);
    l.biases.resize(static_cast<std::size_t>(l.kernel.knum));
    for (auto& b : l.biases) b = static_cast<std::int32_t>(rng() % 2048) - 1024;
}

}  // namespace

LayerSpec make_conv(std::string name, KernelShape kernel, InputShape input, Stride stride, Padding padding,
                    Activation act, std::uint32_t seed) {
    LayerSpec l;
    l.name = std::move(name);
    l.kernel = kernel;
    l.input = input;
    l.stride = stride;
    l.padding = padding;
    l.activation = act;
    fill_tensors(l, seed);
    l.validate();
    return l;
}

LayerSpec mobilenet_layer(int index, std::uint32_t seed) {
    struct Row {
        int kz, knum, in;
    };
    static constexpr Row kRows[] = {
        {128, 128, 56}, {128, 256, 28}, {256, 256, 28}, {256, 512, 14},
        {512, 512, 14}, {512, 1024, 7}, {1024, 1024, 7},
    };
    if (index < 1 || index > 7) throw ConfigError("mobilenet layer index must be 1..7, got " + std::to_string(index));
    const auto& r = kRows[index - 1];
    return make_conv("mobilenet_" + std::to_string(index), {1, 1, r.kz, r.knum}, {r.in, r.in, r.kz}, {1, 1},
                     Padding::same, Activation::relu, seed + static_cast<std::uint32_t>(index));
}

std::vector<LayerSpec> mobilenet_layers(std::uint32_t seed) {
    std::vector<LayerSpec> out;
    for (int i = 1; i <= 7; ++i) out.push_back(mobilenet_layer(i, seed));
    return out;
}

std::vector<LayerSpec> resnet18_layers(std::uint32_t seed) {
    std::vector<LayerSpec> out;
    const int channels[] = {64, 128, 256, 512};
    const int sizes[] = {56, 28, 14, 7};
    for (int i = 0; i < 4; ++i)
        out.push_back(make_conv("resnet18_" + std::to_string(i + 1), {3, 3, channels[i], channels[i]},
                                {sizes[i], sizes[i], channels[i]}, {1, 1}, Padding::same, Activation::relu,
                                seed + 100 + static_cast<std::uint32_t>(i)));
    return out;
}

std::vector<std::int8_t> random_ifm(const InputShape& shape, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::vector<std::int8_t> ifm(static_cast<std::size_t>(shape.element_count()));
    for (auto& v : ifm) v = static_cast<std::int8_t>(rng() & 0xff);
    return ifm;
}

LayerSpec random_layer(std::uint32_t seed, const RandomLayerLimits& lim) {
    std::mt19937 rng(seed);
    const auto act = static_cast<Activation>(pick(rng, 0, 2));
    if (pick(rng, 0, 9) == 0) {
        const int inputs = pick(rng, 1, lim.max_channels * 4);
        const int units = pick(rng, 1, lim.max_kernels * 2);
        LayerSpec probe;
        probe.kernel = {1, 1, inputs, units};
        fill_tensors(probe, rng());
        return make_dense("random_dense_" + std::to_string(seed), inputs, units, act, std::move(probe.weights),
                          std::move(probe.biases));
    }
    KernelShape k{pick(rng, 1, lim.max_kernel), pick(rng, 1, lim.max_kernel), pick(rng, 1, lim.max_channels),
                  pick(rng, 1, lim.max_kernels)};
    const auto padding = pick(rng, 0, 1) ? Padding::same : Padding::valid;
    const int min_y = padding == Padding::valid ? k.ky : 1;
    const int min_x = padding == Padding::valid ? k.kx : 1;
    InputShape in{pick(rng, min_y, lim.max_input), pick(rng, min_x, lim.max_input), k.kz};
    Stride s{pick(rng, 1, lim.max_stride), pick(rng, 1, lim.max_stride)};
    return make_conv("random_" + std::to_string(seed), k, in, s, padding, act, rng());
}

}  // namespace cimsync::fixtures
