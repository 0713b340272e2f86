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

#include "cimsync/isa.hpp"

#include <algorithm>

#include "cimsync/error.hpp"
#include "text_util.hpp"

namespace cimsync {

const char* mnemonic(Opcode op) {
    switch (op) {
        case Opcode::load: return "LOAD";
        case Opcode::store: return "STORE";
        case Opcode::mvm: return "MVM";
        case Opcode::acc: return "ACC";
        case Opcode::addb: return "ADDB";
        case Opcode::act: return "ACT";
        case Opcode::call: return "CALL";
        case Opcode::wait: return "WAIT";
        case Opcode::halt: return "HALT";
    }
    return "?";
}

std::array<std::uint8_t, kInstructionBytes> encode(const Instruction& instr) {
    std::array<std::uint8_t, kInstructionBytes> w{};
    w[0] = static_cast<std::uint8_t>(instr.op);
    switch (instr.op) {
        case Opcode::load:
        case Opcode::store:
            detail::store_le32(&w[2], instr.addr);
            detail::store_le16(&w[6], instr.len);
            detail::store_le16(&w[8], instr.buf_off);
            break;
        case Opcode::act: w[2] = static_cast<std::uint8_t>(instr.arg); break;
        case Opcode::call: detail::store_le16(&w[2], static_cast<std::uint16_t>(instr.arg)); break;
        case Opcode::wait: detail::store_le32(&w[2], instr.arg); break;
        default: break;
    }
    return w;
}

Instruction decode(std::span<const std::uint8_t, kInstructionBytes> w) {
    const auto reserved_zero = [&](std::size_t from) {
        if (w[1] != 0 || !std::all_of(w.begin() + static_cast<std::ptrdiff_t>(from), w.end(),
                                      [](std::uint8_t b) { return b == 0; }))
            throw ConsistencyError("instruction word has non-zero reserved bytes");
    };
    Instruction i;
    switch (w[0]) {
        case static_cast<std::uint8_t>(Opcode::load):
        case static_cast<std::uint8_t>(Opcode::store):
            reserved_zero(10);
            i.op = static_cast<Opcode>(w[0]);
            i.addr = detail::load_le32(&w[2]);
            i.len = detail::load_le16(&w[6]);
            i.buf_off = detail::load_le16(&w[8]);
            return i;
        case static_cast<std::uint8_t>(Opcode::act):
            reserved_zero(3);
            if (w[2] > 2) throw ConsistencyError("unknown activation kind " + std::to_string(w[2]));
            return Instruction::act(w[2]);
        case static_cast<std::uint8_t>(Opcode::call):
            reserved_zero(4);
            return Instruction::call(detail::load_le16(&w[2]));
        case static_cast<std::uint8_t>(Opcode::wait):
            reserved_zero(6);
            return Instruction::wait(detail::load_le32(&w[2]));
        case static_cast<std::uint8_t>(Opcode::mvm):
        case static_cast<std::uint8_t>(Opcode::acc):
        case static_cast<std::uint8_t>(Opcode::addb):
        case static_cast<std::uint8_t>(Opcode::halt):
            reserved_zero(2);
            i.op = static_cast<Opcode>(w[0]);
            return i;
        default: throw ConsistencyError("unknown opcode " + std::to_string(w[0]));
    }
}

std::string to_string(const Instruction& i) {
    std::string s = mnemonic(i.op);
    switch (i.op) {
        case Opcode::load:
        case Opcode::store:
            s += " addr=" + std::to_string(i.addr) + " len=" + std::to_string(i.len) +
                 " buf=" + std::to_string(i.buf_off);
            break;
        case Opcode::act: s += " kind=" + std::to_string(i.arg); break;
        case Opcode::call: s += " core=" + std::to_string(i.arg); break;
        case Opcode::wait: s += " seq>=" + std::to_string(i.arg); break;
        default: break;
    }
    return s;
}

}  // namespace cimsync
