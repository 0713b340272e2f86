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

#include "cimsync/codegen.hpp"

#include <algorithm>
#include <limits>

#include "cimsync/error.hpp"

namespace cimsync {

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::sequential: return "sequential";
        case Scheme::linear: return "linear";
        case Scheme::cyclic: return "cyclic";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "sequential") return Scheme::sequential;
    if (name == "linear") return Scheme::linear;
    if (name == "cyclic") return Scheme::cyclic;
    throw ConfigError("unknown scheme '" + std::string(name) + "' (expected sequential, linear or cyclic)");
}

std::uint64_t MemoryLayout::image_bytes() const {
    std::uint64_t end = code_base;
    for (const auto& s : sections) end = std::max<std::uint64_t>(end, std::uint64_t{s.offset} + s.length_bytes);
    end = std::max<std::uint64_t>(end, std::uint64_t{ifm.offset} + ifm.length_values);
    end = std::max<std::uint64_t>(end, std::uint64_t{ofm.offset} + std::uint64_t{ofm.length_values} * kOfmValueBytes);
    return end;
}

std::int64_t Program::instruction_count() const {
    std::int64_t n = 0;
    for (const auto& c : cores) n += static_cast<std::int64_t>(c.size());
    return n;
}

std::uint32_t bin_header_bytes(std::size_t core_count) {
    // magic, version, core_count, per-core (offset, length), ifm/ofm descriptors
    return static_cast<std::uint32_t>(4 + 2 + 2 + 8 * core_count + 16);
}

namespace {

constexpr std::uint64_t kAlign = 16;

std::uint64_t align_up(std::uint64_t v) { return (v + kAlign - 1) / kAlign * kAlign; }

struct OwnerRole {
    bool first;
    bool last;
};

OwnerRole role_of(Scheme scheme, int vg, std::int64_t j, int pv) {
    int position = vg;
    if (scheme == Scheme::cyclic) {
        const int start = static_cast<int>(j % pv);
        position = (vg - start + pv) % pv;
    }
    return {position == 0, position == pv - 1};
}

void check_encodable(const MappingPlan& plan) {
    const auto& p = plan.partition;
    constexpr auto u16 = std::numeric_limits<std::uint16_t>::max();
    if (p.rows > u16 || p.cols > u16)
        throw ConfigError("crossbar dimensions above 65535 cannot be addressed by LOAD/STORE");
    if (p.core_count() > std::int64_t{u16} + 1) throw ConfigError("more than 65536 cores cannot be addressed by CALL");
}

/// Emits all streams with the given region bases.
std::vector<std::vector<Instruction>> emit_streams(const MappingPlan& plan, Scheme scheme, std::uint32_t ifm_base,
                                                   std::uint32_t ofm_base) {
    check_encodable(plan);
    const auto& p = plan.partition;
    const auto vectors = plan.ofm.vector_count();
    const auto knum = static_cast<std::int64_t>(plan.layer.kernel.knum);
    const auto act_kind = static_cast<std::uint8_t>(plan.layer.activation);
    const bool synchronized = scheme != Scheme::sequential;

    std::vector<std::vector<Instruction>> streams(static_cast<std::size_t>(p.core_count()));
    std::vector<std::int64_t> idx;
    for (int hg = 0; hg < p.ph; ++hg) {
        const int rows = p.row_sizes[static_cast<std::size_t>(hg)];
        for (int vg = 0; vg < p.pv; ++vg) {
            const int cols = p.col_sizes[static_cast<std::size_t>(vg)];
            const int col_begin = p.col_begin(vg);
            const int successor = p.core_id(hg, (vg + 1) % p.pv);
            auto& out = streams[static_cast<std::size_t>(p.core_id(hg, vg))];
            std::uint32_t waited = 0;

            for (const auto j : vector_order(scheme, vg, p.pv, vectors)) {
                const auto role = role_of(scheme, vg, j, p.pv);

                // Input slice as runs of consecutive IFM addresses; padding is skipped.
                idx = plan.input_map.slice(j, col_begin, cols);
                int c = 0;
                while (c < cols) {
                    if (idx[static_cast<std::size_t>(c)] == InputIndexMap::kPad) {
                        ++c;
                        continue;
                    }
                    int end = c + 1;
                    while (end < cols && end - c < std::numeric_limits<std::uint16_t>::max() &&
                           idx[static_cast<std::size_t>(end)] == idx[static_cast<std::size_t>(end - 1)] + 1)
                        ++end;
                    out.push_back(Instruction::load(
                        static_cast<std::uint32_t>(ifm_base + idx[static_cast<std::size_t>(c)]),
                        static_cast<std::uint16_t>(end - c), static_cast<std::uint16_t>(c)));
                    c = end;
                }
                out.push_back(Instruction::mvm());

                const auto ofm_addr =
                    static_cast<std::uint32_t>(ofm_base + (j * knum + p.row_begin(hg)) * kOfmValueBytes);
                if (!role.first) {
                    if (synchronized) out.push_back(Instruction::wait(++waited));
                    out.push_back(Instruction::load(ofm_addr, static_cast<std::uint16_t>(rows), 0));
                    out.push_back(Instruction::acc());
                } else {
                    out.push_back(Instruction::addb());
                }
                if (role.last) out.push_back(Instruction::act(act_kind));
                out.push_back(Instruction::store(ofm_addr, static_cast<std::uint16_t>(rows), 0));
                if (!role.last && synchronized) out.push_back(Instruction::call(static_cast<std::uint16_t>(successor)));
            }
            out.push_back(Instruction::halt());
        }
    }
    return streams;
}

bool overlaps(std::uint64_t a0, std::uint64_t a1, std::uint64_t b0, std::uint64_t b1) {
    return a0 < b1 && b0 < a1;
}

}  // namespace

std::vector<std::int64_t> vector_order(Scheme scheme, int vg, int pv, std::int64_t vectors) {
    std::vector<std::int64_t> order;
    order.reserve(static_cast<std::size_t>(vectors));
    if (scheme != Scheme::cyclic) {
        for (std::int64_t j = 0; j < vectors; ++j) order.push_back(j);
        return order;
    }
    for (std::int64_t base = 0; base < vectors; base += pv)
        for (int step = 0; step < pv; ++step) {
            const auto j = base + (vg - step + pv) % pv;
            if (j < vectors) order.push_back(j);
        }
    return order;
}

MemoryLayout default_layout(const MappingPlan& plan, Scheme scheme) {
    const auto streams = emit_streams(plan, scheme, 0, 0);
    MemoryLayout layout;
    layout.code_base = static_cast<std::uint32_t>(align_up(bin_header_bytes(streams.size())));
    std::uint64_t cursor = layout.code_base;
    for (const auto& s : streams) cursor += s.size() * kInstructionBytes;
    const auto ifm_values = static_cast<std::uint64_t>(plan.layer.input.element_count());
    const auto ofm_values = static_cast<std::uint64_t>(plan.ofm.element_count());
    const auto ifm_off = align_up(cursor);
    const auto ofm_off = align_up(ifm_off + ifm_values);
    if (ofm_off + ofm_values * kOfmValueBytes > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError("layer image exceeds the 32-bit shared-memory address space");
    layout.ifm = {static_cast<std::uint32_t>(ifm_off), static_cast<std::uint32_t>(ifm_values)};
    layout.ofm = {static_cast<std::uint32_t>(ofm_off), static_cast<std::uint32_t>(ofm_values)};
    return layout;
}

Program emit_program(const MappingPlan& plan, Scheme scheme, const MemoryLayout& layout) {
    const auto ifm_values = static_cast<std::uint64_t>(plan.layer.input.element_count());
    const auto ofm_values = static_cast<std::uint64_t>(plan.ofm.element_count());
    if (layout.ifm.length_values < ifm_values)
        throw LayoutError("IFM region holds " + std::to_string(layout.ifm.length_values) + " values, layer needs " +
                          std::to_string(ifm_values));
    if (layout.ofm.length_values < ofm_values)
        throw LayoutError("OFM region holds " + std::to_string(layout.ofm.length_values) + " values, layer needs " +
                          std::to_string(ofm_values));

    Program program;
    program.scheme = scheme;
    program.cores = emit_streams(plan, scheme, layout.ifm.offset, layout.ofm.offset);
    program.layout = layout;
    program.layout.sections.clear();

    const std::uint64_t header_end = bin_header_bytes(program.cores.size());
    if (layout.code_base < header_end) throw LayoutError("instruction area overlaps the bin header");
    std::uint64_t cursor = layout.code_base;
    for (const auto& stream : program.cores) {
        const auto bytes = stream.size() * kInstructionBytes;
        program.layout.sections.push_back({static_cast<std::uint32_t>(cursor), static_cast<std::uint32_t>(bytes)});
        cursor += bytes;
    }
    if (cursor > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError("instruction sections exceed the 32-bit shared-memory address space");

    const std::uint64_t ifm0 = layout.ifm.offset, ifm1 = ifm0 + layout.ifm.length_values;
    const std::uint64_t ofm0 = layout.ofm.offset, ofm1 = ofm0 + std::uint64_t{layout.ofm.length_values} * kOfmValueBytes;
    if (overlaps(ifm0, ifm1, ofm0, ofm1)) throw LayoutError("IFM and OFM regions overlap");
    if (overlaps(0, header_end, ifm0, ifm1) || overlaps(0, header_end, ofm0, ofm1))
        throw LayoutError("feature-map region overlaps the bin header");
    if (overlaps(layout.code_base, cursor, ifm0, ifm1) || overlaps(layout.code_base, cursor, ofm0, ofm1))
        throw LayoutError("instruction sections overlap a feature-map region");
    if (ofm1 > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError("OFM region exceeds the 32-bit shared-memory address space");
    return program;
}

Program compile_layer(const MappingPlan& plan, Scheme scheme) {
    return emit_program(plan, scheme, default_layout(plan, scheme));
}

std::int64_t count_calls_analytic(Scheme scheme, std::int64_t ph, std::int64_t pv, std::int64_t vectors) {
    switch (scheme) {
        case Scheme::sequential: return 0;
        case Scheme::linear: return ph * vectors * (pv - 1);
        case Scheme::cyclic: return ph * ((vectors + pv - 1) / pv) * pv * (pv - 1);
    }
    return 0;
}

std::int64_t count_calls_emitted(const Program& program) {
    std::int64_t calls = 0;
    for (const auto& stream : program.cores)
        calls += std::count_if(stream.begin(), stream.end(), [](const Instruction& i) { return i.op == Opcode::call; });
    return calls;
}

StaticCounts count_traffic_analytic(const MappingPlan& plan, Scheme scheme) {
    const auto& p = plan.partition;
    const auto vectors = plan.ofm.vector_count();
    std::int64_t input_values = 0;
    if (plan.layer.padding == Padding::valid) {
        input_values = vectors * plan.layer.kernel.unrolled_length();
    } else {
        const auto len = plan.layer.kernel.unrolled_length();
        for (std::int64_t j = 0; j < vectors; ++j)
            for (std::int64_t c = 0; c < len; ++c)
                if (plan.input_map.index(j, c) != InputIndexMap::kPad) ++input_values;
    }
    const std::int64_t knum = plan.layer.kernel.knum;  // == sum of row sizes
    StaticCounts counts;
    counts.loads_values = p.ph * input_values + (p.pv - 1) * vectors * knum;
    counts.stores_values = p.pv * vectors * knum;
    counts.calls = scheme == Scheme::sequential ? 0 : count_calls_analytic(Scheme::linear, p.ph, p.pv, vectors);
    counts.waits = counts.calls;
    return counts;
}

StaticCounts count_program(const Program& program) {
    StaticCounts counts;
    for (const auto& stream : program.cores) {
        for (const auto& i : stream) {
            switch (i.op) {
                case Opcode::load: counts.loads_values += i.len; break;
                case Opcode::store: counts.stores_values += i.len; break;
                case Opcode::call: ++counts.calls; break;
                case Opcode::wait: ++counts.waits; break;
                default: break;
            }
        }
    }
    return counts;
}

double call_overhead_percent(const StaticCounts& counts, double bytes_per_call, double bytes_per_value) {
    const double data = static_cast<double>(counts.loads_values + counts.stores_values) * bytes_per_value;
    if (data <= 0.0) throw UndefinedMetricError("call overhead is undefined without data traffic");
    return 100.0 * static_cast<double>(counts.calls) * bytes_per_call / data;
}

void inject_wait_fault(Program& program, int core, int wait_index, std::uint32_t delta) {
    if (core < 0 || core >= static_cast<int>(program.cores.size()))
        throw ConfigError("fault injection: no core " + std::to_string(core));
    std::vector<Instruction*> waits;
    for (auto& i : program.cores[static_cast<std::size_t>(core)])
        if (i.op == Opcode::wait) waits.push_back(&i);
    const int n = static_cast<int>(waits.size());
    const int at = wait_index < 0 ? n + wait_index : wait_index;
    if (at < 0 || at >= n)
        throw ConfigError("fault injection: core " + std::to_string(core) + " has " + std::to_string(n) + " WAITs");
    waits[static_cast<std::size_t>(at)]->arg += delta;
}

}  // namespace cimsync
