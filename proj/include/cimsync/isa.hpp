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
 * @file isa.hpp
 * @brief Core instruction set and its fixed 16-byte encoding.
 *
 * Word layout (little-endian):
 *
 * | byte  | LOAD / STORE | ACT  | CALL    | WAIT  | others |
 * |-------|--------------|------|---------|-------|--------|
 * | 0     | opcode       |      |         |       |        |
 * | 1     | 0            |      |         |       |        |
 * | 2..5  | mem_addr u32 | kind | core u16| value | 0      |
 * | 6..7  | len u16      |      |         |       |        |
 * | 8..9  | buf_off u16  |      |         |       |        |
 * | 10..15| 0            |      |         |       |        |
 *
 * LOAD targets the input buffer when mem_addr lies in the IFM region and the
 * partial buffer when it lies in the OFM region. MVM consumes the input
 * buffer: it is zero after the multiplication, so positions not written by
 * the next LOADs (padding) read as zero.
 */

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace cimsync {

enum class Opcode : std::uint8_t {
    load = 1,
    store = 2,
    mvm = 3,
    acc = 4,
    addb = 5,
    act = 6,
    call = 7,
    wait = 8,
    halt = 9,
};

inline constexpr std::size_t kInstructionBytes = 16;

struct Instruction {
    Opcode op = Opcode::halt;
    std::uint32_t addr = 0;    // LOAD/STORE
    std::uint16_t len = 0;     // LOAD/STORE
    std::uint16_t buf_off = 0; // LOAD/STORE
    std::uint32_t arg = 0;     // ACT kind, CALL core id, WAIT threshold

    static Instruction load(std::uint32_t addr, std::uint16_t len, std::uint16_t buf_off) {
        return {Opcode::load, addr, len, buf_off, 0};
    }
    static Instruction store(std::uint32_t addr, std::uint16_t len, std::uint16_t buf_off) {
        return {Opcode::store, addr, len, buf_off, 0};
    }
    static Instruction mvm() { return {Opcode::mvm, 0, 0, 0, 0}; }
    static Instruction acc() { return {Opcode::acc, 0, 0, 0, 0}; }
    static Instruction addb() { return {Opcode::addb, 0, 0, 0, 0}; }
    static Instruction act(std::uint8_t kind) { return {Opcode::act, 0, 0, 0, kind}; }
    static Instruction call(std::uint16_t core) { return {Opcode::call, 0, 0, 0, core}; }
    static Instruction wait(std::uint32_t value) { return {Opcode::wait, 0, 0, 0, value}; }
    static Instruction halt() { return {Opcode::halt, 0, 0, 0, 0}; }

    bool operator==(const Instruction&) const = default;
};

std::array<std::uint8_t, kInstructionBytes> encode(const Instruction& instr);

/// Throws ConsistencyError on an unknown opcode or non-zero reserved bytes.
Instruction decode(std::span<const std::uint8_t, kInstructionBytes> word);

std::string to_string(const Instruction& instr);
const char* mnemonic(Opcode op);

}  // namespace cimsync
