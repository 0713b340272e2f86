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

/**
 * @file fixtures.hpp
 * @brief Bundled benchmark layers and seeded random layers.
 *
 * Tensor values come straight from std::mt19937 output (not from a
 * distribution class), so a seed gives the same layer on every platform.
 *
 * Mobilenet layers are 1x1, stride 1, same padding, ReLU. The ResNet-18
 * layers are 3x3, stride 1, same padding, ReLU (one per stage).
 */

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cimsync/model_ir.hpp"

namespace cimsync::fixtures {

inline constexpr std::uint32_t kDefaultSeed = 2023;

/// Conv layer with seeded weights in [-128, 127] and biases in [-1024, 1023].
LayerSpec make_conv(std::string name, KernelShape kernel, InputShape input, Stride stride, Padding padding,
                    Activation act, std::uint32_t seed);

/// The seven pointwise Mobilenet layers, named mobilenet_1 .. mobilenet_7.
std::vector<LayerSpec> mobilenet_layers(std::uint32_t seed = kDefaultSeed);
/// One layer of the above; index is 1-based.
LayerSpec mobilenet_layer(int index, std::uint32_t seed = kDefaultSeed);

/// 3x3 layers 64@56, 128@28, 256@14, 512@7, named resnet18_1 .. resnet18_4.
std::vector<LayerSpec> resnet18_layers(std::uint32_t seed = kDefaultSeed);

std::vector<std::int8_t> random_ifm(const InputShape& shape, std::uint32_t seed);

struct RandomLayerLimits {
    int max_kernel = 3;    // K_Y, K_X
    int max_channels = 16; // K_Z
    int max_kernels = 16;  // K_NUM
    int max_input = 12;    // I_Y, I_X
    int max_stride = 2;
};

/// Random conv2d (or occasionally dense) layer with random stride, padding
/// and activation. Always has a non-empty output.
LayerSpec random_layer(std::uint32_t seed, const RandomLayerLimits& limits = {});

}  // namespace cimsync::fixtures
