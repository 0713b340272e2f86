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

#include "cimsync/arch.hpp"

#include <set>
#include <sstream>
#include <tuple>

#include "cimsync/error.hpp"
#include "text_util.hpp"

namespace cimsync {

std::string_view to_string(Arbitration arb) {
    return arb == Arbitration::round_robin ? "round_robin" : "fixed_priority";
}

Arbitration parse_arbitration(std::string_view name) {
    if (name == "fixed_priority") return Arbitration::fixed_priority;
    if (name == "round_robin") return Arbitration::round_robin;
    throw ConfigError("unknown arbitration '" + std::string(name) + "', expected fixed_priority or round_robin");
}

void ArchConfig::validate() const {
    if (xbar_rows < 1 || xbar_cols < 1) throw ConfigError("crossbar dimensions must be >= 1");
    if (xbar_rows > 65535 || xbar_cols > 65535) throw ConfigError("crossbar dimensions must be <= 65535");
    if (bus_width_bytes < 1) throw ConfigError("bus_width_bytes must be >= 1");
    if (shared_mem_bytes < 1) throw ConfigError("shared_mem_bytes must be >= 1");
    if (bytes_per_value_ifm < 1 || bytes_per_value_ofm < 1 || bytes_per_call < 1)
        throw ConfigError("bytes per transferred item must be >= 1");
}

std::pair<int, int> parse_xbar(std::string_view text) {
    const auto x = text.find_first_of("xX");
    int rows = 0, cols = 0;
    if (x == std::string_view::npos) {
        if (!detail::parse_integer(text, rows)) throw ConfigError("bad crossbar size '" + std::string(text) + "'");
        cols = rows;
    } else if (!detail::parse_integer(text.substr(0, x), rows) || !detail::parse_integer(text.substr(x + 1), cols)) {
        throw ConfigError("bad crossbar size '" + std::string(text) + "', expected MxN");
    }
    if (rows < 1 || cols < 1) throw ConfigError("crossbar dimensions must be >= 1, got '" + std::string(text) + "'");
    return {rows, cols};
}

ArchConfig parse_arch_config(std::string_view text) {
    ArchConfig arch;
    std::set<std::string> seen;
    int line_no = 0;
    for (const auto& raw : detail::split_lines(text)) {
        ++line_no;
        const auto line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, line, "expected key=value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ParseError(line_no, key, "duplicate key");

        const auto u64 = [&](std::uint64_t& out) {
            if (!detail::parse_integer(value, out)) throw ParseError(line_no, key, "expected a non-negative integer");
        };
        const auto i32 = [&](int& out) {
            if (!detail::parse_integer(value, out)) throw ParseError(line_no, key, "expected an integer");
        };
        const auto u32 = [&](std::uint32_t& out) {
            if (!detail::parse_integer(value, out)) throw ParseError(line_no, key, "expected a non-negative integer");
        };

        if (key == "xbar") {
            try {
                std::tie(arch.xbar_rows, arch.xbar_cols) = parse_xbar(value);
            } catch (const ConfigError& e) {
                throw ParseError(line_no, key, e.what());
            }
        } else if (key == "xbar_rows") i32(arch.xbar_rows);
        else if (key == "xbar_cols") i32(arch.xbar_cols);
        else if (key == "bus_width_bytes") i32(arch.bus_width_bytes);
        else if (key == "shared_mem_bytes") u64(arch.shared_mem_bytes);
        else if (key == "t_mvm") u64(arch.t_mvm);
        else if (key == "t_gpeu_per_elem") u64(arch.t_gpeu_per_elem);
        else if (key == "t_bus_overhead") u64(arch.t_bus_overhead);
        else if (key == "t_mem") u64(arch.t_mem);
        else if (key == "bytes_per_value_ifm") u32(arch.bytes_per_value_ifm);
        else if (key == "bytes_per_value_ofm") u32(arch.bytes_per_value_ofm);
        else if (key == "bytes_per_call") u32(arch.bytes_per_call);
        else if (key == "scheme") {
            try {
                arch.scheme = parse_scheme(value);
            } catch (const ConfigError& e) {
                throw ParseError(line_no, key, e.what());
            }
        } else if (key == "arbitration") {
            try {
                arch.arbitration = parse_arbitration(value);
            } catch (const ConfigError& e) {
                throw ParseError(line_no, key, e.what());
            }
        } else if (key == "charge_instruction_fetch") {
            if (value == "true" || value == "1") arch.charge_instruction_fetch = true;
            else if (value == "false" || value == "0") arch.charge_instruction_fetch = false;
            else throw ParseError(line_no, key, "expected true or false");
        } else {
            throw ParseError(line_no, key, "unknown key");
        }
    }
    arch.validate();
    return arch;
}

std::string to_text(const ArchConfig& arch) {
    std::ostringstream os;
    os << "xbar_rows=" << arch.xbar_rows << "\n"
       << "xbar_cols=" << arch.xbar_cols << "\n"
       << "bus_width_bytes=" << arch.bus_width_bytes << "\n"
       << "shared_mem_bytes=" << arch.shared_mem_bytes << "\n"
       << "t_mvm=" << arch.t_mvm << "\n"
       << "t_gpeu_per_elem=" << arch.t_gpeu_per_elem << "\n"
       << "t_bus_overhead=" << arch.t_bus_overhead << "\n"
       << "t_mem=" << arch.t_mem << "\n"
       << "bytes_per_value_ifm=" << arch.bytes_per_value_ifm << "\n"
       << "bytes_per_value_ofm=" << arch.bytes_per_value_ofm << "\n"
       << "bytes_per_call=" << arch.bytes_per_call << "\n"
       << "scheme=" << to_string(arch.scheme) << "\n"
       << "arbitration=" << to_string(arch.arbitration) << "\n"
       << "charge_instruction_fetch=" << (arch.charge_instruction_fetch ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace cimsync
