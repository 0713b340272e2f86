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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "cimsync/codegen.hpp"

namespace cimsync {

/// Bus arbitration among requesting cores.
/// fixed_priority: the lowest requesting core id wins.
/// round_robin: the next requesting id after the last grant wins.
enum class Arbitration { fixed_priority, round_robin };
std::string_view to_string(Arbitration arb);
/// Throws ConfigError for an unknown name.
Arbitration parse_arbitration(std::string_view name);

/// Architecture parameters of the simulated multi-core system. All latencies
/// are in bus clock cycles.
///
/// Text form is one `key=value` per line, `#` starts a comment. Keys are the
/// member names; `xbar=MxN` sets both crossbar dimensions.
struct ArchConfig {
    int xbar_rows = 128;  // M, outputs per crossbar
    int xbar_cols = 128;  // N, inputs per crossbar
    int bus_width_bytes = 32;
    std::uint64_t shared_mem_bytes = std::uint64_t{256} << 20;

    std::uint64_t t_mvm = 4096;
    std::uint64_t t_gpeu_per_elem = 1;
    std::uint64_t t_bus_overhead = 2;
    std::uint64_t t_mem = 1;

    std::uint32_t bytes_per_value_ifm = 1;
    std::uint32_t bytes_per_value_ofm = 1;
    std::uint32_t bytes_per_call = 4;

    Scheme scheme = Scheme::cyclic;
    Arbitration arbitration = Arbitration::fixed_priority;

    /// Charge one 16-byte bus transaction per executed instruction.
    bool charge_instruction_fetch = false;

    /// Throws ConfigError.
    void validate() const;

    bool operator==(const ArchConfig&) const = default;
};

/// Keys absent from the text keep their default. Throws ParseError/ConfigError.
ArchConfig parse_arch_config(std::string_view text);
std::string to_text(const ArchConfig& arch);

/// Parses "MxN" (or a single "M" for square crossbars).
std::pair<int, int> parse_xbar(std::string_view text);

}  // namespace cimsync
