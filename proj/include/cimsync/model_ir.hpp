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
 * @file model_ir.hpp
 * @brief Layer representation, model text format and output shape inference.
 *
 * A model is a list of conv2d/dense layers. Each layer is described in a
 * line-oriented text file and its tensors live in a separate little-endian
 * weight blob:
 *
 * ```
 * # comment
 * [layer]
 * name=conv_pw1
 * kind=conv2d
 * kernel=1 1 128 128      # K_Y K_X K_Z K_NUM (HWIO)
 * input=56 56 128         # I_Y I_X I_Z
 * stride=1 1
 * padding=same            # valid | same
 * activation=relu         # none | relu | leaky_relu
 * weight_offset=0         # byte offset of K_Y*K_X*K_Z*K_NUM int8 values
 * bias_offset=16384       # byte offset of K_NUM int32 values
 * ```
 *
 * Dense layers use `kind=dense` and must have K_Y = K_X = I_Y = I_X = 1.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cimsync {

enum class LayerKind { conv2d, dense };
enum class Padding { valid, same };
enum class Activation : std::uint8_t { none = 0, relu = 1, leaky_relu = 2 };

/// Kernel dimensions in HWIO order.
struct KernelShape {
    int ky = 1;
    int kx = 1;
    int kz = 1;
    int knum = 1;

    /// Length of one unrolled kernel, i.e. the column count of the kernel matrix.
    std::int64_t unrolled_length() const { return std::int64_t{ky} * kx * kz; }
    std::int64_t element_count() const { return unrolled_length() * knum; }

    bool operator==(const KernelShape&) const = default;
};

struct InputShape {
    int iy = 1;
    int ix = 1;
    int iz = 1;

    std::int64_t element_count() const { return std::int64_t{iy} * ix * iz; }

    bool operator==(const InputShape&) const = default;
};

struct Stride {
    int y = 1;
    int x = 1;

    bool operator==(const Stride&) const = default;
};

struct OfmShape {
    int oy = 0;
    int ox = 0;
    int oz = 0;  // == K_NUM

    /// Number of output vectors per horizontal group.
    std::int64_t vector_count() const { return std::int64_t{oy} * ox; }
    std::int64_t element_count() const { return vector_count() * oz; }

    bool operator==(const OfmShape&) const = default;
};

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::conv2d;
    KernelShape kernel;
    InputShape input;
    Stride stride;
    Padding padding = Padding::valid;
    Activation activation = Activation::none;
    std::vector<std::int8_t> weights;  // HWIO, K_NUM innermost
    std::vector<std::int32_t> biases;  // K_NUM

    /// Throws ShapeError if any layer invariant is violated.
    void validate() const;

    std::int8_t weight(int dy, int dx, int z, int k) const {
        const auto idx = ((std::int64_t{dy} * kernel.kx + dx) * kernel.kz + z) * kernel.knum + k;
        return weights[static_cast<std::size_t>(idx)];
    }

    bool operator==(const LayerSpec&) const = default;
};

/// Zero padding applied before the first row/column for `same` padding.
struct PadOffsets {
    int top = 0;
    int left = 0;
};

OfmShape infer_ofm_shape(const LayerSpec& layer);

/// Leading padding for the layer; zero for `valid`. Total padding is split
/// floor before, ceil after.
PadOffsets pad_offsets(const LayerSpec& layer);

/// A dense layer of `units` outputs over `inputs` values, as a 1x1 conv2d.
LayerSpec make_dense(std::string name, int inputs, int units, Activation act,
                     std::vector<std::int8_t> weights, std::vector<std::int32_t> biases);

struct ModelFiles {
    std::string text;
    std::vector<std::uint8_t> blob;
};

std::vector<LayerSpec> parse_model(std::string_view model_text, std::span<const std::uint8_t> weight_blob);

/// Inverse of parse_model; tensors are packed back to back in declaration order.
ModelFiles serialize_model(std::span<const LayerSpec> layers);

std::string_view to_string(LayerKind kind);
std::string_view to_string(Padding padding);
std::string_view to_string(Activation act);

}  // namespace cimsync
