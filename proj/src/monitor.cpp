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

#include "cimsync/monitor.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace cimsync {

namespace {

struct CoreTrack {
    std::map<std::int64_t, std::size_t> open;  // vector -> interval index
    std::optional<std::size_t> releasable;     // stored, a CALL may still follow
};

}  // namespace

MonitorReport check_protocol(const MachineState& state, std::span<const TraceEvent> trace,
                             std::size_t max_violations) {
    MonitorReport rep;
    const auto fail = [&](std::string msg) {
        if (rep.violations.size() < max_violations) rep.violations.push_back(std::move(msg));
    };

    const auto& ofm = state.layout.ofm;
    const std::uint64_t ofm_end = ofm.offset + std::uint64_t{ofm.length_values} * kOfmValueBytes;
    const auto oz = static_cast<std::uint64_t>(state.ofm_shape.oz);
    const auto vectors = state.ofm_shape.vector_count();
    std::vector<CoreTrack> track(state.cores.size());
    std::vector<std::vector<int>> done(state.cores.size());  // per core, per vector: times owned

    for (const auto& e : trace) {
        if (e.core < 0 || static_cast<std::size_t>(e.core) >= state.cores.size()) {
            fail("trace names unknown core " + std::to_string(e.core));
            continue;
        }
        auto& t = track[static_cast<std::size_t>(e.core)];
        const bool ofm_access = (e.op == Opcode::load || e.op == Opcode::store) && e.address >= ofm.offset &&
                                e.address < ofm_end;
        if (ofm_access) {
            const auto j = static_cast<std::int64_t>((e.address - ofm.offset) / kOfmValueBytes / oz);
            if (e.kind == TraceKind::bus_grant) {
                t.releasable.reset();
                if (!t.open.count(j)) {
                    t.open[j] = rep.intervals.size();
                    rep.intervals.push_back({e.core, j, e.cycle, e.cycle});
                }
            } else if (e.kind == TraceKind::bus_done && e.op == Opcode::store) {
                const auto it = t.open.find(j);
                if (it == t.open.end()) {
                    fail("core " + std::to_string(e.core) + " stored vector " + std::to_string(j) + " without owning it");
                    continue;
                }
                rep.intervals[it->second].end = e.cycle;
                t.releasable = it->second;
                t.open.erase(it);
            }
        } else if (e.op == Opcode::call && e.kind == TraceKind::bus_done) {
            if (t.releasable) rep.intervals[*t.releasable].end = e.cycle;
            else fail("core " + std::to_string(e.core) + " sent a CALL at cycle " + std::to_string(e.cycle) +
                      " without a preceding STORE");
            t.releasable.reset();
        } else if (e.kind == TraceKind::bus_grant && e.op == Opcode::load) {
            t.releasable.reset();
        }
    }

    for (std::size_t c = 0; c < track.size(); ++c)
        for (const auto& [j, idx] : track[c].open)
            fail("core " + std::to_string(c) + " never stored vector " + std::to_string(j));

    // Exactly once per (core, vector).
    for (auto& d : done) d.assign(static_cast<std::size_t>(vectors), 0);
    for (const auto& iv : rep.intervals)
        if (iv.vector >= 0 && iv.vector < vectors) ++done[static_cast<std::size_t>(iv.core)][static_cast<std::size_t>(iv.vector)];
    for (std::size_t c = 0; c < done.size(); ++c)
        for (std::int64_t j = 0; j < vectors; ++j) {
            const int n = done[c][static_cast<std::size_t>(j)];
            if (n != 1)
                fail("core " + std::to_string(c) + " owned vector " + std::to_string(j) + " " + std::to_string(n) +
                     " times");
        }

    // Mutual exclusion within each horizontal group.
    std::map<std::pair<int, std::int64_t>, std::vector<const OwnershipInterval*>> groups;
    for (const auto& iv : rep.intervals)
        groups[{state.cores[static_cast<std::size_t>(iv.core)].config.hg, iv.vector}].push_back(&iv);
    for (auto& [key, list] : groups) {
        std::sort(list.begin(), list.end(), [](const auto* a, const auto* b) {
            return a->begin != b->begin ? a->begin < b->begin : a->core < b->core;
        });
        for (std::size_t i = 1; i < list.size(); ++i)
            if (list[i]->begin < list[i - 1]->end)
                fail("vector " + std::to_string(key.second) + " of HG " + std::to_string(key.first) + ": core " +
                     std::to_string(list[i]->core) + " took it at cycle " + std::to_string(list[i]->begin) +
                     " while core " + std::to_string(list[i - 1]->core) + " held it until " +
                     std::to_string(list[i - 1]->end));
    }
    return rep;
}

std::vector<std::string> check_seq_nr(const MachineState& state, const SimReport& report) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < state.cores.size() && c < report.cores.size(); ++c) {
        std::uint32_t max_wait = 0;
        for (const auto& in : state.cores[c].program)
            if (in.op == Opcode::wait) max_wait = std::max(max_wait, in.arg);
        if (report.cores[c].final_seq_nr != max_wait)
            out.push_back("core " + std::to_string(c) + " ended with SEQ_NR " +
                          std::to_string(report.cores[c].final_seq_nr) + ", largest WAIT threshold is " +
                          std::to_string(max_wait));
    }
    return out;
}

}  // namespace cimsync
