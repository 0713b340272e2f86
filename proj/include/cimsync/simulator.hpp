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
 * @file simulator.hpp
 * @brief Discrete-event model of the multi-core CIM system.
 *
 * Cores execute their streams in order. Compute instructions only take time;
 * LOAD, STORE and CALL are bus transactions. The single shared bus is
 * granted by ArchConfig::arbitration and is held for
 * `t_bus_overhead + ceil(payload / bus_width)` cycles. A LOAD or
 * STORE returns to its core `t_mem` cycles after the transaction ends; a
 * CALL increments the target's SEQ_NR at the cycle its transaction ends.
 * WAIT blocks without touching the bus.
 *
 * With the sequential scheme, core C(hg, vg+1) is released when C(hg, vg)
 * halts; horizontal groups always run concurrently.
 *
 * Events at the same cycle are handled in core-id order, so a run is a pure
 * function of its inputs.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cimsync/arch.hpp"
#include "cimsync/error.hpp"
#include "cimsync/image.hpp"

namespace cimsync {

struct CoreImage {
    CoreConfig config;
    std::vector<Instruction> program;
};

/// A configured machine after the setup phase. Immutable; run() copies what
/// it mutates, so one state can be run under several architectures.
struct MachineState {
    Scheme scheme = Scheme::linear;
    InputShape ifm_shape;
    OfmShape ofm_shape;
    MemoryLayout layout;
    int pv = 0;
    int ph = 0;
    std::vector<std::uint8_t> memory;  // shared memory, IFM copied in, OFM zero
    std::vector<CoreImage> cores;
};

/// Configures the cores from bin/cfg and copies the IFM into its placeholder.
/// Throws ConsistencyError or CapacityError.
MachineState load_setup(std::span<const std::uint8_t> bin, std::string_view cfg, std::span<const std::int8_t> ifm,
                        const ArchConfig& arch);
MachineState load_setup(std::vector<std::uint8_t> bin, const LayerConfig& cfg, std::span<const std::int8_t> ifm,
                        const ArchConfig& arch);
/// Same as serializing the program and loading the resulting images.
MachineState load_setup(const MappingPlan& plan, const Program& program, std::span<const std::int8_t> ifm,
                        const ArchConfig& arch);

enum class CoreStatus { held, running, bus_blocked, waiting, halted };
std::string_view to_string(CoreStatus status);

enum class TraceKind : std::uint8_t {
    start,
    bus_request,
    bus_grant,
    bus_done,
    wait_block,
    wait_release,
    halt,
};

/// One simulator event. For bus events `op` names the instruction; `address`
/// is the memory address, the CALL target core, or the WAIT threshold.
struct TraceEvent {
    std::uint64_t cycle = 0;
    int core = 0;
    TraceKind kind = TraceKind::start;
    Opcode op = Opcode::halt;
    std::uint32_t address = 0;
    std::uint32_t length = 0;
};

void write_trace_csv(std::ostream& os, std::span<const TraceEvent> events);

struct CoreStats {
    std::int64_t loads_values = 0;
    std::int64_t stores_values = 0;
    std::int64_t calls = 0;
    std::int64_t waits = 0;
    std::int64_t instructions = 0;
    std::uint64_t stall_cycles_bus = 0;
    std::uint64_t stall_cycles_wait = 0;
    std::uint64_t fetch_bytes = 0;

    CoreStats& operator+=(const CoreStats& o);
    bool operator==(const CoreStats&) const = default;
};

struct CoreReport {
    int core = 0;
    int hg = 0;
    int vg = 0;
    CoreStats stats;
    std::uint64_t start_cycle = 0;
    std::uint64_t halt_cycle = 0;
    std::uint32_t final_seq_nr = 0;

    bool operator==(const CoreReport&) const = default;
};

struct SimReport {
    Scheme scheme = Scheme::linear;
    bool completed = false;  // completion interrupt raised
    std::uint64_t total_cycles = 0;
    int pv = 0;
    int ph = 0;
    int bus_width_bytes = 0;
    CoreStats totals;
    std::vector<CoreReport> cores;
    OfmShape ofm_shape;
    std::vector<std::int32_t> ofm;  // O_Y x O_X x K_NUM

    bool operator==(const SimReport&) const = default;
};

struct BlockedCore {
    int core = 0;
    CoreStatus status = CoreStatus::held;
    std::size_t pc = 0;
    std::uint32_t seq_nr = 0;
    std::uint32_t wait_value = 0;
};

/// No event is schedulable but some cores have not halted.
class DeadlockError : public Error {
public:
    DeadlockError(std::uint64_t cycle, std::vector<BlockedCore> cores);

    std::uint64_t cycle() const noexcept { return cycle_; }
    const std::vector<BlockedCore>& cores() const noexcept { return cores_; }

private:
    std::uint64_t cycle_;
    std::vector<BlockedCore> cores_;
};

struct RunOptions {
    std::vector<TraceEvent>* trace = nullptr;
};

/// Runs the inference phase. Throws DeadlockError or ExecutionError.
SimReport run(const MachineState& state, const ArchConfig& arch, const RunOptions& options = {});

/// Structured report with a stable field order.
std::string report_json(const SimReport& report, bool include_ofm = true);

}  // namespace cimsync
