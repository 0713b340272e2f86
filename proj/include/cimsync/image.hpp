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
 * @file image.hpp
 * @brief The bin (shared-memory image) and cfg (core configuration) files.
 *
 * bin, all little-endian:
 *
 *     "CIMB"  u16 version(=1)  u16 core_count
 *     core_count x { u32 instr_offset, u32 instr_len_bytes }
 *     u32 ifm_offset  u32 ifm_len_values  u32 ofm_offset  u32 ofm_len_values
 *     ... instruction sections, zero-filled IFM and OFM placeholders
 *
 * The file is the complete image that is copied to shared memory address 0.
 *
 * cfg, UTF-8 text, whitespace separated:
 *
 *     cimsync-cfg 1
 *     scheme cyclic
 *     ifm I_Y I_X I_Z
 *     ofm O_Y O_X K_NUM
 *     cores C
 *     core <id>            (one block per core)
 *     hg <hg>
 *     vg <vg>
 *     rows <r>
 *     cols <c>
 *     weights
 *     <r lines of c int8 values>
 *     biases
 *     <r int32 values>
 *     instr_offset <bytes>
 *     end
 */

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cimsync/codegen.hpp"

namespace cimsync {

inline constexpr std::uint16_t kBinVersion = 1;

struct BinImage {
    MemoryLayout layout;
    std::vector<std::vector<Instruction>> cores;

    bool operator==(const BinImage&) const = default;
};

/// Throws CapacityError if the image is larger than `capacity_bytes`.
std::vector<std::uint8_t> write_bin(const Program& program,
                                    std::uint64_t capacity_bytes = std::numeric_limits<std::uint32_t>::max());

BinImage read_bin(std::span<const std::uint8_t> bytes);

struct CoreConfig {
    int core_id = 0;
    int hg = 0;
    int vg = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::int8_t> weights;  // rows x cols
    std::vector<std::int32_t> biases;  // rows
    std::uint32_t instr_offset = 0;

    bool operator==(const CoreConfig&) const = default;
};

struct LayerConfig {
    Scheme scheme = Scheme::linear;
    InputShape ifm;
    OfmShape ofm;
    std::vector<CoreConfig> cores;

    bool operator==(const LayerConfig&) const = default;
};

LayerConfig make_layer_config(const MappingPlan& plan, const Program& program);

std::string write_cfg(const LayerConfig& config);
std::string write_cfg(const MappingPlan& plan, const Program& program);

/// Throws ParseError with the offending line.
LayerConfig read_cfg(std::string_view text);

}  // namespace cimsync
