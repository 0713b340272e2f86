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
 * @file codegen.hpp
 * @brief Per-core instruction streams for the three ownership schemes.
 *
 * Every output vector j of a horizontal group is a resource that the P_V
 * cores of the group own one after another. The owner order is vg = 0..P_V-1
 * for the sequential and linear schemes and a rotation starting at
 * vg = j mod P_V for the cyclic scheme. Each core walks the vectors in vector_order()
 * and emits, per vector:
 *
 *     LOAD input slice ; MVM
 *     not first owner:  WAIT n ; LOAD partial ; ACC
 *     first owner:      ADDB
 *     last owner:       ACT
 *     STORE
 *     not last owner:   CALL successor
 *
 * The sequential scheme drops WAIT/CALL; the simulator serializes the cores
 * of a group instead.
 */

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cimsync/isa.hpp"
#include "cimsync/mapping.hpp"

namespace cimsync {

enum class Scheme { sequential, linear, cyclic };

std::string_view to_string(Scheme scheme);
/// Throws ConfigError for an unknown name.
Scheme parse_scheme(std::string_view name);

/// OFM placeholders hold int32 partial sums.
inline constexpr std::uint32_t kOfmValueBytes = 4;

struct Region {
    std::uint32_t offset = 0;
    std::uint32_t length_values = 0;

    bool operator==(const Region&) const = default;
};

struct Section {
    std::uint32_t offset = 0;
    std::uint32_t length_bytes = 0;

    bool operator==(const Section&) const = default;
};

/// Shared-memory map of one compiled layer. Byte offsets from the image start.
struct MemoryLayout {
    std::uint32_t code_base = 0;
    Region ifm;  // int8 values
    Region ofm;  // int32 values
    std::vector<Section> sections;  // per core

    std::uint64_t image_bytes() const;

    bool operator==(const MemoryLayout&) const = default;
};

struct Program {
    Scheme scheme = Scheme::linear;
    MemoryLayout layout;
    std::vector<std::vector<Instruction>> cores;

    std::int64_t instruction_count() const;
};

/// Order in which core `vg` of a horizontal group visits the output vectors.
/// Linear and sequential cores walk 0..O-1. A cyclic core walks each round of
/// P_V vectors starting with the one it owns first, so at step t of a round
/// every core holds the vector where it is the t-th owner.
std::vector<std::int64_t> vector_order(Scheme scheme, int vg, int pv, std::int64_t vectors);

/// Size of the bin header for `core_count` cores.
std::uint32_t bin_header_bytes(std::size_t core_count);

/// Header, then instruction sections, then the IFM and OFM placeholders.
MemoryLayout default_layout(const MappingPlan& plan, Scheme scheme);

/// Throws LayoutError when the layout regions are too small or overlap.
Program emit_program(const MappingPlan& plan, Scheme scheme, const MemoryLayout& layout);

/// emit_program with default_layout.
Program compile_layer(const MappingPlan& plan, Scheme scheme);

struct StaticCounts {
    std::int64_t calls = 0;
    std::int64_t waits = 0;
    std::int64_t loads_values = 0;
    std::int64_t stores_values = 0;

    bool operator==(const StaticCounts&) const = default;
};

/// CALL/WAIT count from the closed-form scheme formulas. The cyclic formula
/// rounds O_V_NUM up to whole rotations, so it is an upper bound of what is
/// emitted.
std::int64_t count_calls_analytic(Scheme scheme, std::int64_t ph, std::int64_t pv, std::int64_t vectors);

std::int64_t count_calls_emitted(const Program& program);

/// Values moved by LOAD/STORE and the emitted CALL/WAIT count, derived from
/// the plan alone. Padding positions are never loaded.
StaticCounts count_traffic_analytic(const MappingPlan& plan, Scheme scheme = Scheme::cyclic);

/// The same counters obtained by walking the instruction streams.
StaticCounts count_program(const Program& program);

/// Bus bytes spent on CALLs relative to bytes of data values, in percent.
double call_overhead_percent(const StaticCounts& counts, double bytes_per_call = 4.0, double bytes_per_value = 1.0);

/// Raises the `wait_index`-th WAIT threshold of `core` by `delta`; a negative
/// index counts from the end. Throws ConfigError if there is no such WAIT.
void inject_wait_fault(Program& program, int core, int wait_index, std::uint32_t delta = 1);

}  // namespace cimsync
