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
 * @file monitor.hpp
 * @brief Checks the synchronization protocol on a simulator trace.
 *
 * A core owns OFM vector j of its horizontal group from the grant of its
 * first OFM access to j until the completion of the CALL that releases j,
 * or until its STORE completes when no CALL follows.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cimsync/simulator.hpp"

namespace cimsync {

struct OwnershipInterval {
    int core = 0;
    std::int64_t vector = 0;
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
};

struct MonitorReport {
    std::vector<OwnershipInterval> intervals;
    std::vector<std::string> violations;  // empty when the protocol held

    bool ok() const { return violations.empty(); }
};

/// Mutual exclusion per (HG, vector) and exactly-once ownership per
/// (core, vector). At most `max_violations` messages are kept.
MonitorReport check_protocol(const MachineState& state, std::span<const TraceEvent> trace,
                             std::size_t max_violations = 32);

/// Final SEQ_NR of every core equals the largest WAIT threshold in its stream.
std::vector<std::string> check_seq_nr(const MachineState& state, const SimReport& report);

}  // namespace cimsync
