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

#include "cimsync/simulator.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace cimsync {

std::string_view to_string(CoreStatus status) {
    switch (status) {
        case CoreStatus::held: return "held";
        case CoreStatus::running: return "running";
        case CoreStatus::bus_blocked: return "bus-blocked";
        case CoreStatus::waiting: return "waiting";
        case CoreStatus::halted: return "halted";
    }
    return "?";
}

CoreStats& CoreStats::operator+=(const CoreStats& o) {
    loads_values += o.loads_values;
    stores_values += o.stores_values;
    calls += o.calls;
    waits += o.waits;
    instructions += o.instructions;
    stall_cycles_bus += o.stall_cycles_bus;
    stall_cycles_wait += o.stall_cycles_wait;
    fetch_bytes += o.fetch_bytes;
    return *this;
}

namespace {

std::string deadlock_message(std::uint64_t cycle, const std::vector<BlockedCore>& cores) {
    std::ostringstream os;
    os << "deadlock at cycle " << cycle << ", " << cores.size() << " core(s) not halted:";
    std::size_t shown = 0;
    for (const auto& c : cores) {
        if (shown++ == 16) {
            os << " ...";
            break;
        }
        os << " [core " << c.core << ' ' << to_string(c.status) << " pc=" << c.pc << " seq_nr=" << c.seq_nr;
        if (c.status == CoreStatus::waiting) os << " waits for " << c.wait_value;
        os << ']';
    }
    return os.str();
}

}  // namespace

DeadlockError::DeadlockError(std::uint64_t cycle, std::vector<BlockedCore> cores)
    : Error(deadlock_message(cycle, cores)), cycle_(cycle), cores_(std::move(cores)) {}

// ---------------------------------------------------------------------------
// Setup phase

MachineState load_setup(std::vector<std::uint8_t> bin, const LayerConfig& cfg, std::span<const std::int8_t> ifm,
                        const ArchConfig& arch) {
    arch.validate();
    auto image = read_bin(bin);
    const auto n = image.cores.size();
    if (n == 0) throw ConsistencyError("bin declares zero cores");
    if (cfg.cores.size() != n)
        throw ConsistencyError("bin has " + std::to_string(n) + " cores but cfg has " + std::to_string(cfg.cores.size()));
    if (bin.size() > arch.shared_mem_bytes)
        throw CapacityError("image of " + std::to_string(bin.size()) + " bytes exceeds shared memory of " +
                            std::to_string(arch.shared_mem_bytes) + " bytes");

    MachineState st;
    st.scheme = cfg.scheme;
    st.ifm_shape = cfg.ifm;
    st.ofm_shape = cfg.ofm;
    st.layout = image.layout;

    for (const auto& c : cfg.cores) {
        st.pv = std::max(st.pv, c.vg + 1);
        st.ph = std::max(st.ph, c.hg + 1);
    }
    if (std::size_t(st.pv) * std::size_t(st.ph) != n)
        throw ConsistencyError("cfg group ids do not form a complete P_H x P_V grid");

    std::vector<int> hg_rows(static_cast<std::size_t>(st.ph), -1), vg_cols(static_cast<std::size_t>(st.pv), -1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = cfg.cores[i];
        const auto where = "cfg core " + std::to_string(i) + ": ";
        if (c.core_id != static_cast<int>(i)) throw ConsistencyError(where + "core ids must be 0..C-1 in order");
        if (c.core_id != c.hg * st.pv + c.vg) throw ConsistencyError(where + "core id is not hg * P_V + vg");
        if (c.rows > arch.xbar_rows || c.cols > arch.xbar_cols)
            throw ConsistencyError(where + "tile " + std::to_string(c.rows) + "x" + std::to_string(c.cols) +
                                   " exceeds the " + std::to_string(arch.xbar_rows) + "x" +
                                   std::to_string(arch.xbar_cols) + " crossbar");
        if (c.weights.size() != std::size_t(c.rows) * std::size_t(c.cols) || c.biases.size() != std::size_t(c.rows))
            throw ConsistencyError(where + "tile data does not match its dimensions");
        if (c.instr_offset != image.layout.sections[i].offset)
            throw ConsistencyError(where + "instr_offset " + std::to_string(c.instr_offset) +
                                   " does not match bin section offset " +
                                   std::to_string(image.layout.sections[i].offset));
        auto& rows = hg_rows[static_cast<std::size_t>(c.hg)];
        auto& cols = vg_cols[static_cast<std::size_t>(c.vg)];
        if ((rows != -1 && rows != c.rows) || (cols != -1 && cols != c.cols))
            throw ConsistencyError(where + "tile dimensions differ within a group");
        rows = c.rows;
        cols = c.cols;
    }
    std::int64_t total_rows = 0;
    for (const auto r : hg_rows) total_rows += r;
    if (total_rows != cfg.ofm.oz) throw ConsistencyError("horizontal groups do not cover the OFM channels");

    if (static_cast<std::int64_t>(ifm.size()) != cfg.ifm.element_count())
        throw ConsistencyError("IFM has " + std::to_string(ifm.size()) + " values, layer expects " +
                               std::to_string(cfg.ifm.element_count()));
    if (image.layout.ifm.length_values != cfg.ifm.element_count())
        throw ConsistencyError("bin IFM placeholder size does not match the cfg input shape");
    if (image.layout.ofm.length_values != cfg.ofm.element_count())
        throw ConsistencyError("bin OFM placeholder size does not match the cfg output shape");

    st.memory = std::move(bin);
    std::memcpy(st.memory.data() + st.layout.ifm.offset, ifm.data(), ifm.size());
    std::fill_n(st.memory.begin() + st.layout.ofm.offset,
                std::size_t{st.layout.ofm.length_values} * kOfmValueBytes, std::uint8_t{0});

    st.cores.reserve(n);
    for (std::size_t i = 0; i < n; ++i) st.cores.push_back({cfg.cores[i], std::move(image.cores[i])});
    return st;
}

MachineState load_setup(std::span<const std::uint8_t> bin, std::string_view cfg, std::span<const std::int8_t> ifm,
                        const ArchConfig& arch) {
    return load_setup(std::vector<std::uint8_t>(bin.begin(), bin.end()), read_cfg(cfg), ifm, arch);
}

MachineState load_setup(const MappingPlan& plan, const Program& program, std::span<const std::int8_t> ifm,
                        const ArchConfig& arch) {
    return load_setup(write_bin(program, arch.shared_mem_bytes), make_layer_config(plan, program), ifm, arch);
}

// ---------------------------------------------------------------------------
// Inference phase

namespace {

enum class Tx { load_ifm, load_ofm, store, call, fetch };

struct Core {
    const CoreImage* image = nullptr;
    std::size_t pc = 0;
    CoreStatus status = CoreStatus::held;
    std::uint32_t seq_nr = 0;
    std::uint32_t wait_value = 0;
    std::uint64_t blocked_since = 0;
    bool fetched = false;
    Tx pending = Tx::fetch;
    std::vector<std::int8_t> input;
    std::vector<std::int32_t> acc;
    std::vector<std::int32_t> partial;
    CoreReport report;
};

class Engine {
public:
    Engine(const MachineState& st, const ArchConfig& arch, const RunOptions& opt)
        : st_(st), arch_(arch), trace_(opt.trace), memory_(st.memory) {
        cores_.resize(st.cores.size());
        for (std::size_t i = 0; i < cores_.size(); ++i) {
            auto& c = cores_[i];
            const auto& cfg = st.cores[i].config;
            c.image = &st.cores[i];
            c.input.assign(static_cast<std::size_t>(cfg.cols), 0);
            c.acc.assign(static_cast<std::size_t>(cfg.rows), 0);
            c.partial.assign(static_cast<std::size_t>(cfg.rows), 0);
            c.report.core = static_cast<int>(i);
            c.report.hg = cfg.hg;
            c.report.vg = cfg.vg;
        }
    }

    SimReport run() {
        for (std::size_t i = 0; i < cores_.size(); ++i)
            if (st_.scheme != Scheme::sequential || cores_[i].image->config.vg == 0) start(static_cast<int>(i), 0);

        std::uint64_t t = 0;
        for (;;) {
            std::uint64_t next = kNever;
            if (!ready_.empty()) next = ready_.top().first;
            if (bus_busy_) next = std::min(next, bus_until_);
            if (next == kNever) break;
            t = next;
            if (bus_busy_ && bus_until_ == t) {
                bus_busy_ = false;
                complete(t);
            }
            while (!ready_.empty() && ready_.top().first == t) {
                const int c = ready_.top().second;
                ready_.pop();
                step(c, t);
            }
            if (!bus_busy_ && !requests_.empty()) grant(t);
        }

        if (halted_ != cores_.size()) {
            std::vector<BlockedCore> blocked;
            for (const auto& c : cores_)
                if (c.status != CoreStatus::halted)
                    blocked.push_back({c.report.core, c.status, c.pc, c.seq_nr, c.wait_value});
            throw DeadlockError(t, std::move(blocked));
        }
        return finish();
    }

private:
    static constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

    void emit(std::uint64_t cycle, int core, TraceKind kind, Opcode op = Opcode::halt, std::uint32_t address = 0,
              std::uint32_t length = 0) {
        if (trace_) trace_->push_back({cycle, core, kind, op, address, length});
    }

    void schedule(int c, std::uint64_t t) {
        cores_[static_cast<std::size_t>(c)].status = CoreStatus::running;
        ready_.emplace(t, c);
    }

    void start(int c, std::uint64_t t) {
        cores_[static_cast<std::size_t>(c)].report.start_cycle = t;
        emit(t, c, TraceKind::start);
        schedule(c, t);
    }

    void retire(Core& core) {
        ++core.pc;
        ++core.report.stats.instructions;
        core.fetched = false;
    }

    [[noreturn]] void fault(int c, const std::string& what) const {
        throw ExecutionError("core " + std::to_string(c) + " pc " +
                             std::to_string(cores_[static_cast<std::size_t>(c)].pc) + ": " + what);
    }

    bool in_ifm(std::uint32_t addr, std::uint32_t len) const {
        const auto& r = st_.layout.ifm;
        return addr >= r.offset && std::uint64_t{addr} + len <= std::uint64_t{r.offset} + r.length_values;
    }

    bool in_ofm(std::uint32_t addr, std::uint32_t len) const {
        const auto& r = st_.layout.ofm;
        if (addr < r.offset || (addr - r.offset) % kOfmValueBytes != 0) return false;
        return std::uint64_t{(addr - r.offset) / kOfmValueBytes} + len <= r.length_values;
    }

    void request(int c, Tx kind, std::uint64_t t) {
        auto& core = cores_[static_cast<std::size_t>(c)];
        core.status = CoreStatus::bus_blocked;
        core.pending = kind;
        core.blocked_since = t;
        requests_.insert(c);
        if (trace_) {
            const auto& in = core.image->program[core.pc];
            emit(t, c, TraceKind::bus_request, in.op, in.op == Opcode::call ? in.arg : in.addr, in.len);
        }
    }

    std::uint64_t payload_bytes(const Core& core) const {
        const auto& in = core.image->program[core.pc];
        switch (core.pending) {
            case Tx::load_ifm: return std::uint64_t{in.len} * arch_.bytes_per_value_ifm;
            case Tx::load_ofm:
            case Tx::store: return std::uint64_t{in.len} * arch_.bytes_per_value_ofm;
            case Tx::call: return arch_.bytes_per_call;
            case Tx::fetch: return kInstructionBytes;
        }
        return 0;
    }

    void grant(std::uint64_t t) {
        auto it = requests_.begin();
        if (arch_.arbitration == Arbitration::round_robin) {
            it = requests_.upper_bound(last_grant_);
            if (it == requests_.end()) it = requests_.begin();
        }
        const int c = *it;
        requests_.erase(it);
        last_grant_ = c;

        auto& core = cores_[static_cast<std::size_t>(c)];
        const auto width = static_cast<std::uint64_t>(arch_.bus_width_bytes);
        const auto occupancy = arch_.t_bus_overhead + (payload_bytes(core) + width - 1) / width;
        bus_busy_ = true;
        bus_owner_ = c;
        bus_until_ = t + std::max<std::uint64_t>(occupancy, 1);
        core.report.stats.stall_cycles_bus += t - core.blocked_since;
        if (trace_) {
            const auto& in = core.image->program[core.pc];
            emit(t, c, TraceKind::bus_grant, core.pending == Tx::fetch ? Opcode::halt : in.op,
                 in.op == Opcode::call ? in.arg : in.addr, in.len);
        }
    }

    void complete(std::uint64_t t) {
        const int c = bus_owner_;
        auto& core = cores_[static_cast<std::size_t>(c)];
        auto& stats = core.report.stats;
        const auto& in = core.image->program[core.pc];
        if (trace_ && core.pending != Tx::fetch)
            emit(t, c, TraceKind::bus_done, in.op, in.op == Opcode::call ? in.arg : in.addr, in.len);

        switch (core.pending) {
            case Tx::fetch:
                core.fetched = true;
                stats.fetch_bytes += kInstructionBytes;
                schedule(c, t);
                return;
            case Tx::load_ifm:
                std::memcpy(core.input.data() + in.buf_off, memory_.data() + in.addr, in.len);
                stats.loads_values += in.len;
                break;
            case Tx::load_ofm:
                for (std::uint32_t i = 0; i < in.len; ++i)
                    core.partial[in.buf_off + i] =
                        static_cast<std::int32_t>(detail::load_le32(memory_.data() + in.addr + kOfmValueBytes * i));
                stats.loads_values += in.len;
                break;
            case Tx::store:
                for (std::uint32_t i = 0; i < in.len; ++i)
                    detail::store_le32(memory_.data() + in.addr + kOfmValueBytes * i,
                                       static_cast<std::uint32_t>(core.acc[in.buf_off + i]));
                stats.stores_values += in.len;
                break;
            case Tx::call: {
                ++stats.calls;
                const int target = static_cast<int>(in.arg);
                auto& succ = cores_[static_cast<std::size_t>(target)];
                ++succ.seq_nr;
                if (succ.status == CoreStatus::waiting && succ.seq_nr >= succ.wait_value) {
                    succ.report.stats.stall_cycles_wait += t - succ.blocked_since;
                    ++succ.report.stats.waits;
                    retire(succ);
                    emit(t, target, TraceKind::wait_release, Opcode::wait, succ.wait_value);
                    schedule(target, t);
                }
                retire(core);
                schedule(c, t);
                return;
            }
        }
        retire(core);
        schedule(c, t + arch_.t_mem);
    }

    void step(int c, std::uint64_t t) {
        auto& core = cores_[static_cast<std::size_t>(c)];
        const auto& prog = core.image->program;
        const auto& cfg = core.image->config;
        for (;;) {
            if (core.pc >= prog.size()) fault(c, "ran past the end of its program");
            if (arch_.charge_instruction_fetch && !core.fetched) {
                request(c, Tx::fetch, t);
                return;
            }
            const auto& in = prog[core.pc];
            std::uint64_t latency = 0;
            switch (in.op) {
                case Opcode::load:
                    if (in_ifm(in.addr, in.len)) {
                        if (in.buf_off + in.len > cfg.cols) fault(c, "LOAD overruns the input buffer");
                        request(c, Tx::load_ifm, t);
                    } else if (in_ofm(in.addr, in.len)) {
                        if (in.buf_off + in.len > cfg.rows) fault(c, "LOAD overruns the partial buffer");
                        request(c, Tx::load_ofm, t);
                    } else {
                        fault(c, "LOAD outside the IFM and OFM regions");
                    }
                    return;
                case Opcode::store:
                    if (!in_ofm(in.addr, in.len)) fault(c, "STORE outside the OFM region");
                    if (in.buf_off + in.len > cfg.rows) fault(c, "STORE overruns the accumulator");
                    request(c, Tx::store, t);
                    return;
                case Opcode::call:
                    if (in.arg >= cores_.size()) fault(c, "CALL to unknown core " + std::to_string(in.arg));
                    request(c, Tx::call, t);
                    return;
                case Opcode::mvm: {
                    const auto* w = cfg.weights.data();
                    const auto* x = core.input.data();
                    for (int r = 0; r < cfg.rows; ++r, w += cfg.cols) {
                        std::int32_t sum = 0;
                        for (int k = 0; k < cfg.cols; ++k) sum += std::int32_t{w[k]} * std::int32_t{x[k]};
                        core.acc[static_cast<std::size_t>(r)] = sum;
                    }
                    std::fill(core.input.begin(), core.input.end(), std::int8_t{0});
                    latency = arch_.t_mvm;
                    break;
                }
                case Opcode::acc:
                    for (int r = 0; r < cfg.rows; ++r)
                        core.acc[static_cast<std::size_t>(r)] += core.partial[static_cast<std::size_t>(r)];
                    latency = arch_.t_gpeu_per_elem * static_cast<std::uint64_t>(cfg.rows);
                    break;
                case Opcode::addb:
                    for (int r = 0; r < cfg.rows; ++r)
                        core.acc[static_cast<std::size_t>(r)] += cfg.biases[static_cast<std::size_t>(r)];
                    latency = arch_.t_gpeu_per_elem * static_cast<std::uint64_t>(cfg.rows);
                    break;
                case Opcode::act:
                    if (in.arg == static_cast<std::uint32_t>(Activation::relu)) {
                        for (auto& v : core.acc) v = std::max(v, 0);
                    } else if (in.arg == static_cast<std::uint32_t>(Activation::leaky_relu)) {
                        for (auto& v : core.acc)
                            if (v < 0) v >>= 3;
                    }
                    latency = arch_.t_gpeu_per_elem * static_cast<std::uint64_t>(cfg.rows);
                    break;
                case Opcode::wait:
                    if (core.seq_nr < in.arg) {
                        core.status = CoreStatus::waiting;
                        core.wait_value = in.arg;
                        core.blocked_since = t;
                        emit(t, c, TraceKind::wait_block, Opcode::wait, in.arg);
                        return;
                    }
                    ++core.report.stats.waits;
                    break;
                case Opcode::halt:
                    ++core.report.stats.instructions;
                    core.status = CoreStatus::halted;
                    core.report.halt_cycle = t;
                    ++halted_;
                    emit(t, c, TraceKind::halt);
                    if (st_.scheme == Scheme::sequential && cfg.vg + 1 < st_.pv) start(c + 1, t);
                    return;
            }
            retire(core);
            if (latency > 0) {
                ready_.emplace(t + latency, c);
                return;
            }
        }
    }

    SimReport finish() {
        SimReport r;
        r.scheme = st_.scheme;
        r.completed = true;
        r.pv = st_.pv;
        r.ph = st_.ph;
        r.bus_width_bytes = arch_.bus_width_bytes;
        r.ofm_shape = st_.ofm_shape;
        for (auto& c : cores_) {
            c.report.final_seq_nr = c.seq_nr;
            r.total_cycles = std::max(r.total_cycles, c.report.halt_cycle);
            r.totals += c.report.stats;
            r.cores.push_back(c.report);
        }
        const auto* ofm = memory_.data() + st_.layout.ofm.offset;
        r.ofm.resize(st_.layout.ofm.length_values);
        for (std::size_t i = 0; i < r.ofm.size(); ++i)
            r.ofm[i] = static_cast<std::int32_t>(detail::load_le32(ofm + kOfmValueBytes * i));
        return r;
    }

    const MachineState& st_;
    const ArchConfig& arch_;
    std::vector<TraceEvent>* trace_;
    std::vector<std::uint8_t> memory_;
    std::vector<Core> cores_;
    std::priority_queue<std::pair<std::uint64_t, int>, std::vector<std::pair<std::uint64_t, int>>, std::greater<>>
        ready_;
    std::set<int> requests_;
    int last_grant_ = -1;
    bool bus_busy_ = false;
    int bus_owner_ = -1;
    std::uint64_t bus_until_ = 0;
    std::size_t halted_ = 0;
};

}  // namespace

SimReport run(const MachineState& state, const ArchConfig& arch, const RunOptions& options) {
    arch.validate();
    if (state.cores.empty()) throw ConsistencyError("machine has no cores");
    return Engine(state, arch, options).run();
}

// ---------------------------------------------------------------------------
// Output

namespace {

const char* trace_name(const TraceEvent& e) {
    switch (e.kind) {
        case TraceKind::start: return "START";
        case TraceKind::bus_request: return "REQUEST";
        case TraceKind::bus_grant: return "GRANT";
        case TraceKind::bus_done: return "DONE";
        case TraceKind::wait_block: return "WAIT_BLOCK";
        case TraceKind::wait_release: return "WAIT_RELEASE";
        case TraceKind::halt: return "HALT";
    }
    return "?";
}

}  // namespace

void write_trace_csv(std::ostream& os, std::span<const TraceEvent> events) {
    os << "cycle,core,event,address,length\n";
    for (const auto& e : events) {
        os << e.cycle << ',' << e.core << ',' << trace_name(e);
        if (e.kind == TraceKind::bus_request || e.kind == TraceKind::bus_grant || e.kind == TraceKind::bus_done)
            os << '_' << mnemonic(e.op);
        os << ',' << e.address << ',' << e.length << '\n';
    }
}

namespace {

void put_stats(nlohmann::ordered_json& j, const CoreStats& s) {
    j["loads_values"] = s.loads_values;
    j["stores_values"] = s.stores_values;
    j["calls"] = s.calls;
    j["waits"] = s.waits;
    j["instructions"] = s.instructions;
    j["stall_cycles_bus"] = s.stall_cycles_bus;
    j["stall_cycles_wait"] = s.stall_cycles_wait;
    j["fetch_bytes"] = s.fetch_bytes;
}

}  // namespace

std::string report_json(const SimReport& r, bool include_ofm) {
    nlohmann::ordered_json j;
    j["scheme"] = std::string(to_string(r.scheme));
    j["completed"] = r.completed;
    j["total_cycles"] = r.total_cycles;
    j["cores"] = r.cores.size();
    j["p_v"] = r.pv;
    j["p_h"] = r.ph;
    j["bus_width_bytes"] = r.bus_width_bytes;
    nlohmann::ordered_json totals;
    put_stats(totals, r.totals);
    j["totals"] = std::move(totals);
    auto per_core = nlohmann::ordered_json::array();
    for (const auto& c : r.cores) {
        nlohmann::ordered_json e;
        e["core"] = c.core;
        e["hg"] = c.hg;
        e["vg"] = c.vg;
        e["start_cycle"] = c.start_cycle;
        e["halt_cycle"] = c.halt_cycle;
        e["final_seq_nr"] = c.final_seq_nr;
        put_stats(e, c.stats);
        per_core.push_back(std::move(e));
    }
    j["per_core"] = std::move(per_core);
    nlohmann::ordered_json ofm;
    ofm["shape"] = {r.ofm_shape.oy, r.ofm_shape.ox, r.ofm_shape.oz};
    if (include_ofm) ofm["data"] = r.ofm;
    j["ofm"] = std::move(ofm);
    return j.dump(2) + "\n";
}

}  // namespace cimsync
