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
 * @file mapping.hpp
 * @brief im2col layout of one layer over a grid of M x N crossbar cores.
 *
 * The unrolled kernel matrix has K_NUM rows (one per kernel) and
 * K_Y*K_X*K_Z columns, ordered (y, x, z) with z innermost. It is cut into
 * P_H horizontal groups of at most M rows and P_V vertical groups of at most
 * N columns; core C(hg, vg) holds the tile at the crossing. Remainders go to
 * the last group of each direction.
 *
 * Cores are numbered hg * P_V + vg throughout the project.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cimsync/model_ir.hpp"

namespace cimsync {

struct Partition {
    int pv = 0;  // vertical groups (column tiles)
    int ph = 0;  // horizontal groups (row tiles)
    int rows = 0;  // crossbar rows M (outputs)
    int cols = 0;  // crossbar columns N (inputs)
    std::vector<int> row_sizes;  // P_H entries
    std::vector<int> col_sizes;  // P_V entries

    std::int64_t core_count() const { return std::int64_t{pv} * ph; }
    int row_begin(int hg) const { return hg * rows; }
    int col_begin(int vg) const { return vg * cols; }
    int core_id(int hg, int vg) const { return hg * pv + vg; }
};

Partition compute_partition(const KernelShape& kernel, int rows, int cols);

/// Dense row-major int8 matrix.
struct Matrix8 {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<std::int8_t> data;

    std::int8_t at(std::int64_t r, std::int64_t c) const { return data[static_cast<std::size_t>(r * cols + c)]; }
    bool operator==(const Matrix8&) const = default;
};

/// K_NUM x (K_Y*K_X*K_Z) matrix; row k is kernel k flattened (y, x, z).
Matrix8 unroll_kernel_matrix(const LayerSpec& layer);

/// The IFM patch feeding output position (y, x), in kernel-matrix column
/// order. Zero where the patch falls into padding.
std::vector<std::int8_t> unroll_input_vector(const LayerSpec& layer, std::span<const std::int8_t> ifm, int y, int x);

/// Locates every element of an unrolled input vector in the flat IFM
/// (row-major y, x, z). Computed on demand from the layer geometry.
class InputIndexMap {
public:
    static constexpr std::int64_t kPad = -1;

    InputIndexMap() = default;
    explicit InputIndexMap(const LayerSpec& layer);

    /// Flat IFM index of unrolled column `col` at output vector `j`
    /// (j = y * O_X + x), or kPad.
    std::int64_t index(std::int64_t j, std::int64_t col) const;

    /// Indices of columns [col_begin, col_begin + count) at vector j.
    std::vector<std::int64_t> slice(std::int64_t j, int col_begin, int count) const;

private:
    KernelShape kernel_;
    InputShape input_;
    Stride stride_;
    PadOffsets pad_;
    int ox_ = 0;
};

struct Tile {
    int hg = 0;
    int vg = 0;
    int row_begin = 0;
    int col_begin = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::int8_t> weights;  // rows x cols, row-major

    std::int8_t at(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
};

struct MappingPlan {
    LayerSpec layer;
    OfmShape ofm;
    Partition partition;
    std::vector<Tile> tiles;  // indexed by core id
    std::vector<std::vector<std::int32_t>> bias_slices;  // per hg
    InputIndexMap input_map;

    const Tile& tile(int hg, int vg) const { return tiles[static_cast<std::size_t>(partition.core_id(hg, vg))]; }
};

MappingPlan build_mapping_plan(const LayerSpec& layer, int rows, int cols);

/// Human readable core grid for debugging.
std::string describe_plan(const MappingPlan& plan);

}  // namespace cimsync
